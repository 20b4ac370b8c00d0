import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ugks.config import (ConfigError, default_config, load_config, parse_config, write_config)
from ugks.errors import ConfigurationError
from ugks.io import (PROFILE_COLUMNS, ProfileRecord, compare_reference, read_csv,
                     read_profile_csv, records_from_arrays, write_profile_csv, write_slice_csv)


# --- configuration ---------------------------------------------------------

@pytest.mark.parametrize("exp", ["relax", "sod", "shock"])
def test_defaults_roundtrip(exp):
    cfg = default_config(exp)
    assert parse_config(write_config(cfg)) == cfg


def test_experiment_defaults_differ():
    assert default_config("relax").velocity.points == 32
    assert default_config("shock").mesh.kind == "stretched"
    assert default_config("shock").mesh.total_cells == 60
    assert default_config("sod").collision.kn == pytest.approx(1e-3)


def test_unknown_key_rejected_with_name():
    with pytest.raises(ConfigError) as exc:
        parse_config('experiment = "sod"\n[collision]\ntau = 1.0\n')
    assert exc.value.key == "collision.tau"


def test_unknown_top_level_table_rejected():
    with pytest.raises(ConfigError) as exc:
        parse_config('experiment = "sod"\n[solver]\ncfl = 0.5\n')
    assert exc.value.key == "solver"


def test_omega_out_of_range():
    with pytest.raises(ConfigError) as exc:
        parse_config('experiment = "relax"\n[collision]\nomega = 1.5\n')
    assert exc.value.key == "collision.omega"


@pytest.mark.parametrize("text,key", [
    ('experiment = "sod"\n[time]\ncfl = "fast"\n', "time.cfl"),
    ('experiment = "sod"\n[velocity]\npoints = 2.5\n', "velocity.points"),
    ('experiment = "sod"\n[time]\ncfl = 2.0\n', "time.cfl"),
    ('experiment = "sod"\n[collision]\nkn = -1.0\n', "collision.kn"),
    ('experiment = "sod"\n[collision]\nkn = 0.1\nmu_ref = 0.1\n', "collision.kn"),
    ('experiment = "tube"\n', "experiment"),
    ('[time]\ncfl = 0.5\n', "experiment"),
    ('experiment = "sod"\n[spectral]\nmodes = 40\n', "spectral.modes"),
    ('experiment = "shock"\n[shock]\nmach = 0.5\n', "shock.mach"),
    ('experiment = "shock"\n[time]\nmax_wall_time = -1.0\n', "time.max_wall_time"),
    ('experiment = "relax"\n[relax]\nfamily = "bimodal"\n', "relax.family"),
])
def test_invalid_values(text, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.key == key


def test_malformed_toml():
    with pytest.raises(ConfigError):
        parse_config("experiment = \n")


def test_config_error_is_configuration_error():
    assert issubclass(ConfigError, ConfigurationError)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml")


def test_with_operator_validates():
    cfg = default_config("sod")
    assert cfg.with_operator("boltzmann").hybrid.operator == "boltzmann"
    assert cfg.hybrid.operator == "hybrid"
    with pytest.raises(ConfigError):
        cfg.with_operator("bgk")


@settings(max_examples=40, deadline=None)
@given(cfl=st.floats(0.01, 1.0), points=st.integers(4, 64), kn=st.floats(1e-6, 10.0),
       omega=st.floats(0.5, 1.0), family=st.sampled_from(["hs", "vhs", "lj"]),
       op=st.sampled_from(["hybrid", "shakhov", "boltzmann"]), dump=st.booleans())
def test_roundtrip_property(cfl, points, kn, omega, family, op, dump):
    text = (f'experiment = "sod"\n[time]\ncfl = {cfl!r}\n[velocity]\npoints = {points}\n'
            f'[collision]\nkn = {kn!r}\nomega = {omega!r}\nfamily = "{family}"\n'
            f'[hybrid]\noperator = "{op}"\n[output]\ndump_f = {str(dump).lower()}\n')
    cfg = parse_config(text)
    assert parse_config(write_config(cfg)) == cfg
    assert cfg.time.cfl == cfl and cfg.collision.kn == kn


# --- CSV -------------------------------------------------------------------

def _records(n=5):
    x = np.linspace(-1, 1, n)
    return records_from_arrays(x=x, rho=1 + x ** 2 / 3, U=np.sin(x), T=np.exp(x), p=0.5 + x / 7,
                               q_x=-x / 3, shear=x ** 3, dt_tau=0.1)


def test_profile_csv_roundtrip_exact(tmp_path):
    recs = _records()
    path = tmp_path / "p.csv"
    write_profile_csv(recs, path)
    lines = open(path).read().splitlines()
    assert lines[0] == ",".join(PROFILE_COLUMNS)
    assert len(lines) == len(recs) + 1
    assert read_profile_csv(path) == recs


def test_seventeen_significant_digits(tmp_path):
    path = tmp_path / "s.csv"
    write_slice_csv(np.array([1.0 / 3.0]), np.array([2.0 / 3.0]), path)
    header, data = read_csv(path)
    assert header == ["u", "f"]
    assert data[0, 0] == 1.0 / 3.0 and data[0, 1] == 2.0 / 3.0
    assert "0.33333333333333331" in open(path).read()


def test_slice_labels(tmp_path):
    path = tmp_path / "s.csv"
    write_slice_csv(np.arange(3.0), np.ones((2, 3)), path, ["t=0", "t=1"])
    header, data = read_csv(path)
    assert header == ["u", "t=0", "t=1"]
    assert data.shape == (3, 3)


def test_nonfinite_record_rejected():
    with pytest.raises(ValueError):
        ProfileRecord(0, np.nan, 0, 1, 1, 0, 0, 0)


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        write_profile_csv(_records(), os.path.join(blocker, "sub", "p.csv"))


def test_compare_reference():
    recs = _records(11)
    assert compare_reference(recs, recs) == 0.0
    ref = np.column_stack([[r.x for r in recs], [r.rho * 1.01 for r in recs]])
    err = compare_reference(recs, ref, "Linf")
    assert err == pytest.approx(0.01 * max(r.rho for r in recs) / (1.01 * max(r.rho for r in recs)))
    far = np.array([[5.0, 1.0], [6.0, 1.0]])
    with pytest.raises(ConfigurationError):
        compare_reference(recs, far)
    with pytest.raises(ConfigurationError):
        compare_reference(recs, recs, norm="L7")
