"""Tests for scenario files, rendering and presets (src/crossflow/config/)."""
from __future__ import annotations

import pytest

from crossflow.config.parser import CONFIG_KEYS, parse_config, parse_config_text, render_config, scenario_to_mapping
from crossflow.config.presets import PRESETS, get_preset, list_presets
from crossflow.config.scenario import InitialKind, ModelKind, Profile
from crossflow.config.schema import is_valid_key, normalize_key
from crossflow.core.exceptions import ConfigError
from crossflow.core.grid import MixedBoundary
from crossflow.lattice.state import Scheduler
from crossflow.pde.boundary import Mode

EXPECTED_PRESETS = {
    "ex2d_periodic",
    "ex2d_mixed_a",
    "ex2d_mixed_b",
    "particle_mixed",
    "particle_segregate",
    "particle_waves",
    "ex1d_unstable_sin",
    "ex1d_unstable_cos",
    "ex1d_stable",
    "lyapunov_decay",
    "stability_map",
    "compartment_convergence",
}


# ---------------------------------------------------------------------------
# 1. Keys
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    ("raw", "expected"),
    [(" Snapshot-Every ", "snapshot_every"), ("T END", "t_end"), ("gamma0", "gamma0"), ("--r_inf__", "r_inf")],
)
def test_normalize_key(raw, expected):
    assert normalize_key(raw) == expected


def test_is_valid_key():
    assert is_valid_key("t_end")
    assert not is_valid_key("2d")
    assert not is_valid_key("")


# ---------------------------------------------------------------------------
# 2. Parsing
# ---------------------------------------------------------------------------


def test_minimal_file_takes_defaults():
    s = parse_config_text("name = tiny\nmodel = pde1d\nn = 20\nt_end = 1.0\n")
    assert s.name == "tiny"
    assert s.model is ModelKind.PDE1D
    assert s.grid.dims == 1 and s.grid.n == 20
    assert s.params.h == pytest.approx(0.05)
    assert s.mode is Mode.PARABOLIC
    assert s.initial.kind is InitialKind.UNIFORM
    assert s.scheduler is Scheduler.RANDOM_SEQUENTIAL
    assert s.out_dir is None
    assert s.refinements == ()


def test_comments_blank_lines_and_key_spelling():
    text = """
    # a scenario
    Name = spaced   # trailing comment
    MODEL = pde2d
    T-End = 2.5
    swap_gammas = yes
    bc = mixed
    inflow = 0.2
    """
    s = parse_config_text(text)
    assert s.name == "spaced"
    assert s.t_end == 2.5
    assert s.swap_gammas is True
    assert s.grid.bc == MixedBoundary(inflow=0.2, outflux=0.8)


@pytest.mark.parametrize(
    ("text", "line", "fragment"),
    [
        ("name = a\nspeed = 3\n", 2, "Unknown key 'speed'"),
        ("name = a\nname = b\n", 2, "Duplicate key 'name'"),
        ("name = a\n\njust words\n", 3, "key = value"),
        ("n = many\n", 1, "Invalid value for 'n'"),
        ("model = fluid\n", 1, "Invalid value for 'model'"),
        ("swap_gammas = maybe\n", 1, "Invalid value for 'swap_gammas'"),
        ("bc = open\n", 1, "Invalid value for 'bc'"),
        ("9lives = 1\n", 1, "Malformed key"),
    ],
)
def test_parse_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert info.value.line == line
    assert fragment in info.value.message
    assert str(info.value).startswith(f"line {line}: ")


def test_negative_rate_names_nonnegativity_and_line():
    with pytest.raises(ConfigError) as info:
        parse_config_text("name = bad\n\ngamma0 = -1\n")
    assert "nonnegativity" in info.value.message
    assert "gamma0" in info.value.message
    assert info.value.line == 3


def test_profile_must_fit_model():
    with pytest.raises(ConfigError, match="does not fit"):
        parse_config_text("model = pde1d\ninitial = perturbed\nprofile = cos_sin\namplitude = 0.01\n")


def test_lattice_needs_random_initial_state():
    with pytest.raises(ConfigError, match="random"):
        parse_config_text("model = lattice\n")


def test_mixed_boundary_rejected_for_1d():
    with pytest.raises(ConfigError, match="2D"):
        parse_config_text("model = pde1d\nbc = mixed\n")


def test_refinement_list():
    s = parse_config_text("model = compartment\nrefinements = 8, 16,32\nfine_n = 64\n")
    assert s.refinements == (8, 16, 32)
    assert s.fine_n == 64


# ---------------------------------------------------------------------------
# 3. Presets and inheritance
# ---------------------------------------------------------------------------


def test_list_presets_is_complete():
    names = [name for name, _ in list_presets()]
    assert len(names) == 12
    assert set(names) == EXPECTED_PRESETS
    assert all(description for _, description in list_presets())


def test_unknown_preset():
    with pytest.raises(KeyError, match="Unknown preset"):
        get_preset("nope")


@pytest.mark.parametrize("name", sorted(EXPECTED_PRESETS))
def test_preset_render_parse_round_trip(name):
    s = get_preset(name)
    text = render_config(s)
    assert text.startswith("# crossflow scenario")
    assert parse_config_text(text) == s


def test_rendered_keys_follow_documented_order():
    mapping = scenario_to_mapping(get_preset("ex2d_periodic"))
    assert list(mapping) == list(CONFIG_KEYS)


def test_preset_inheritance_overrides_listed_keys():
    s = parse_config_text("preset = ex1d_unstable_sin\nname = short\nt_end = 5\n")
    base = get_preset("ex1d_unstable_sin")
    assert s.name == "short"
    assert s.t_end == 5.0
    assert s.params == base.params
    assert s.initial == base.initial
    assert s.initial.profile is Profile.SIN


def test_preset_inheritance_unknown_name():
    with pytest.raises(ConfigError) as info:
        parse_config_text("name = x\npreset = nope\n")
    assert info.value.line == 2


def test_preset_parameter_values():
    mixed_a = get_preset("ex2d_mixed_a")
    mixed_b = get_preset("ex2d_mixed_b")
    assert mixed_a.params.gamma1 == mixed_b.params.gamma2 == 0.2
    assert mixed_a.params.gamma2 == mixed_b.params.gamma1 == 0.1
    assert mixed_a.grid.bc == MixedBoundary(inflow=0.2, outflux=0.8)
    assert get_preset("particle_segregate").initial.density == 0.5
    assert get_preset("particle_waves").params.gamma0 == 0.0
    assert get_preset("ex1d_stable").initial.r_inf == 0.85
    assert get_preset("stability_map").params.epsilon == 0.005
    assert get_preset("compartment_convergence").refinements == (16, 32, 64)


def test_every_preset_matches_its_key():
    for name, s in PRESETS.items():
        assert s.name == name


# ---------------------------------------------------------------------------
# 4. Sources
# ---------------------------------------------------------------------------


def test_parse_config_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("name = from_file\nmodel = pde2d\nn = 8\n", encoding="utf-8")
    s = parse_config(path)
    assert s.name == "from_file"
    assert s.grid.n == 8


def test_parse_config_by_preset_name():
    assert parse_config("particle_mixed") == get_preset("particle_mixed")


def test_parse_config_missing_source(tmp_path):
    with pytest.raises(ConfigError, match="No such config file or preset"):
        parse_config(tmp_path / "absent.cfg")
