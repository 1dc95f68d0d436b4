import json
import math
from io import StringIO

import numpy as np
import pytest

from kinfront import InvalidParameterError, MinPlusField, SpatialGrid, VelocityGrid
from kinfront.io import (
    config_hash,
    dumps,
    format_value,
    manifest,
    read_field_csv,
    write_csv,
    write_field_csv,
)


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(math.inf) == "inf"
    assert format_value(-math.inf) == "-inf"
    assert format_value(np.float64(2.5)) == "2.5"
    assert format_value(np.int64(3)) == "3"
    assert format_value(True) == "true"
    assert format_value("power_law") == "power_law"


def test_write_csv():
    buffer = StringIO()
    write_csv(buffer, ["t", "x"], [(1.0, math.inf), (2, -0.5)])
    assert buffer.getvalue() == "t,x\n1,inf\n2,-0.5\n"


def test_dumps_handles_numpy_and_infinity():
    record = json.loads(dumps(dict(a=np.arange(3), b=math.inf, c=(np.float64(0.5),))))
    assert record == dict(a=[0, 1, 2], b="inf", c=[0.5])


def test_config_hash_ignores_key_order():
    assert config_hash(dict(a=1, b=2)) == config_hash(dict(b=2, a=1))
    assert config_hash(dict(a=1)) != config_hash(dict(a=2))


def test_manifest():
    checks = [dict(name="one", ok=True), dict(name="two", ok=False)]
    record = manifest("mu", dict(t=1.0), checks, "mu", outputs=["b.csv", "a.csv"])
    assert not record["ok"]
    assert record["outputs"] == ["a.csv", "b.csv"]
    assert set(record["versions"]) == {"kinfront", "numpy", "scipy", "python"}
    assert "results" not in record
    assert manifest("mu", {}, checks[:1], "mu", extra=dict(x=1))["results"] == dict(x=1)


def test_field_files(tmp_path):
    x_grid = SpatialGrid(-1, 1, 3)
    v_grid = VelocityGrid(-1, 1, 3)
    values = np.array([[np.inf, 0.5, 0.0], [1.0, 2.0, 3.0], [0.25, np.inf, 4.0]])
    path = str(tmp_path / "u.csv")
    write_field_csv(path, MinPlusField(values, x_grid, v_grid))
    field = read_field_csv(path)
    assert field.x == x_grid
    assert field.v == v_grid
    assert np.array_equal(field.values, values)

    profile = str(tmp_path / "mu.csv")
    write_field_csv(profile, MinPlusField([0.0, 1.0, np.inf], x_grid))
    assert read_field_csv(profile).v is None

    with pytest.raises(InvalidParameterError):
        read_field_csv(str(tmp_path / "missing.csv"))
