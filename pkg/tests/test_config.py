import numpy as np
import pytest

from lsicert.config import load_config, parse_config, serialize_config
from lsicert.errors import ConfigError, ConfigSyntaxError, MissingRequired, UnknownKey
from lsicert.model import GaussianModel, GridModel

MINIMAL = """schema_version = 1

[model]
type = "gaussian"
precision = [
  [1.0, 0.0],
  [0.0, 1.0],
]

[run]
seed = 3
"""

GRID = """schema_version = 1

[model]
type = "grid"
grids = [[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]]
hamiltonian = "0.25*x1*x2 + 0.5*(x1^2+x2^2)"

[run]
seed = 1
samples = 500
"""


class TestParse:
    def test_minimal_gaussian(self):
        cfg = parse_config(MINIMAL)
        assert cfg.run.seed == 3 and cfg.run.samples == 2000
        assert cfg.output.format == "json"
        model = cfg.build_model()
        assert isinstance(model, GaussianModel)
        np.testing.assert_array_equal(model.precision, np.eye(2))

    def test_grid_expression(self):
        model = parse_config(GRID).build_model()
        assert isinstance(model, GridModel) and model.dim == 2
        for x1 in (-1.0, 0.0, 1.0):
            for x2 in (-1.0, 0.0, 1.0):
                assert model.hamiltonian([x1, x2]) == pytest.approx(0.25 * x1 * x2 + 0.5 * (x1**2 + x2**2))

    def test_misspelled_key_located(self):
        text = MINIMAL.replace("precision =", "presicion =")
        with pytest.raises(UnknownKey) as err:
            parse_config(text)
        locations = [(line, col) for line, col, msg in err.value.errors if "presicion" in msg]
        assert locations == [(5, 1)]

    def test_unknown_section(self):
        with pytest.raises(UnknownKey) as err:
            parse_config(MINIMAL + "\n[extras]\nfoo = 1\n")
        assert any("extras" in msg for _, _, msg in err.value.errors)

    def test_missing_seed(self):
        with pytest.raises(MissingRequired) as err:
            parse_config(MINIMAL.replace("seed = 3", "samples = 10"))
        assert any("run.seed" in msg for _, _, msg in err.value.errors)

    def test_missing_section(self):
        with pytest.raises(MissingRequired):
            parse_config('schema_version = 1\n[model]\ntype = "gaussian"\nprecision = [[1.0]]\n')

    def test_grid_needs_hamiltonian(self):
        with pytest.raises(MissingRequired):
            parse_config(GRID.replace('hamiltonian = "0.25*x1*x2 + 0.5*(x1^2+x2^2)"\n', ""))

    def test_invalid_values(self):
        with pytest.raises(ConfigError) as err:
            parse_config(MINIMAL.replace("seed = 3", "seed = -3"))
        assert type(err.value) is ConfigError
        with pytest.raises(ConfigError):
            parse_config(MINIMAL.replace('"gaussian"', '"lattice"'))
        with pytest.raises(ConfigError):
            parse_config(MINIMAL.replace("schema_version = 1", "schema_version = 2"))

    def test_bad_expression_located(self):
        with pytest.raises(ConfigError) as err:
            parse_config(GRID.replace("x1*x2", "x1*x3"))
        line, _, msg = err.value.errors[0]
        assert line == 6 and "hamiltonian" in msg

    def test_syntax_error_position(self):
        with pytest.raises(ConfigSyntaxError) as err:
            parse_config(MINIMAL.replace("seed = 3", "seed = = 3"))
        line, col, _ = err.value.errors[0]
        assert line == 11 and col > 0

    def test_all_problems_reported(self):
        text = MINIMAL.replace("precision =", "presicion =").replace("seed = 3", "sed = 3")
        with pytest.raises(UnknownKey) as err:
            parse_config(text)
        assert len(err.value.errors) >= 3


class TestRoundTrip:
    @pytest.mark.parametrize("text", [MINIMAL, GRID])
    def test_serialize_parse(self, text):
        cfg = parse_config(text)
        again = parse_config(serialize_config(cfg))
        assert again == cfg
        assert serialize_config(again) == serialize_config(cfg)

    def test_full_sections(self):
        text = MINIMAL + (
            '\n[output]\nformat = "csv"\npath = "out.csv"\n'
            "\n[sweep]\nstart = 0.0\nstop = 0.5\nsteps = 6\n"
            "\n[initial]\nmean = [1.0, 1.0]\n"
            "\n[pathological]\nM = 2.0\nn = [2, 3]\n"
        )
        cfg = parse_config(text)
        assert cfg.sweep.values() == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
        assert parse_config(serialize_config(cfg)) == cfg

    def test_sweep_needs_range(self):
        with pytest.raises(MissingRequired):
            parse_config(MINIMAL + "\n[sweep]\nstart = 0.0\n")

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text(MINIMAL, encoding="utf-8")
        assert load_config(path) == parse_config(MINIMAL)
