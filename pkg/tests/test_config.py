import pytest

from mecoff.config import ExperimentConfig, load_config, parse_config_text
from mecoff.errors import ConfigError


def test_defaults_validate():
    ExperimentConfig().validate()


def test_parse_dotted_keys():
    cfg = parse_config_text("env.n_mec = 7\nddql.zeta = 0.5\n")
    assert cfg.env_n_mec == 7
    assert cfg.ddql_zeta == 0.5


def test_parse_ignores_comments_and_blank_lines():
    cfg = parse_config_text("# a comment\n\nenv.arena = 25.0  # trailing\n")
    assert cfg.env_arena == 25.0


def test_parse_tuples_and_lists():
    cfg = parse_config_text("env.rho_grid = (0.5, 1.0)\n"
                            "env.p_grid = [0.5, 1.0]\n"
                            "env.tr_grid = 0.2\n")
    assert cfg.env_rho_grid == (0.5, 1.0)
    assert cfg.env_p_grid == (0.5, 1.0)
    assert cfg.env_tr_grid == (0.2,)


def test_parse_booleans():
    cfg = parse_config_text("env.global_cost_in_state = true\n")
    assert cfg.env_global_cost_in_state is True
    with pytest.raises(ConfigError):
        parse_config_text("env.global_cost_in_state = 1\n")


def test_unknown_key_is_rejected_with_line_number():
    with pytest.raises(ConfigError, match="line 2.*no_such_key"):
        parse_config_text("env.arena = 10.0\nenv.no_such_key = 3\n")


def test_missing_equals_sign_is_rejected():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("just some words\n")


def test_type_mismatch_integer():
    with pytest.raises(ConfigError, match="expects an integer"):
        parse_config_text("env.n_mec = 2.5\n")


def test_type_mismatch_number():
    with pytest.raises(ConfigError, match="expects a number"):
        parse_config_text("env.arena = hello\n")


@pytest.mark.parametrize("line,fragment", [
    ("ddql.zeta = 1.5", "ddql.zeta"),
    ("ddql.psi = 0.0", "ddql.psi"),
    ("env.n_mec = 0", "env.n_mec"),
    ("env.mec_aerial_fraction = 2.0", "env.mec_aerial_fraction"),
    ("env.rho_grid = (0.5, 0.25)", "env.rho_grid"),
    ("env.penalty = 1.0", "env.penalty"),
    ("env.data_range = (2.0, 1.0)", "env.data_range"),
])
def test_validation_messages_use_dotted_names(line, fragment):
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        parse_config_text(line + "\n")


def test_load_config_missing_file():
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config("/nonexistent/path.cfg")


def test_load_config_roundtrip(tmp_path):
    path = tmp_path / "t.cfg"
    path.write_text("env.n_nodes = 5\nmaster_seed = 42\n")
    cfg = load_config(path)
    assert cfg.env_n_nodes == 5
    assert cfg.master_seed == 42


def test_shipped_profiles_parse():
    import pathlib
    root = pathlib.Path(__file__).resolve().parents[1] / "configs"
    desk = load_config(root / "desk.cfg")
    full = load_config(root / "paper.cfg")
    assert desk.env_n_mec == 4 and desk.env_n_nodes == 10
    assert desk.ddql_eta == 500 and desk.env_horizon == 200
    assert desk.ddql_batch == 64 and desk.ddql_hidden == (64, 32)
    assert full.env_n_mec == 14 and full.env_n_nodes == 55
    assert full.ddql_hidden == (1000, 500, 250, 120)
