"""CSV and JSON output, field files and run manifests."""
import csv
import hashlib
import json
import logging
import math
import os
import platform

import numpy as np
import scipy

from .__version__ import __version__
from .exceptions import InvalidParameterError
from .grids import MinPlusField, SpatialGrid, VelocityGrid

logger = logging.getLogger(__name__)


def format_value(value):
    """Render a cell: 17 significant digits for floats, ``inf`` for infinities."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return "{:.17g}".format(value)
    return str(value)


def write_csv(handle, header, rows):
    """Write a header line and the rows to an open text handle."""
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])


def save_csv(path, header, rows):
    with open(path, "w", newline="") as handle:
        write_csv(handle, header, rows)
    logger.info("wrote %s", path)


def jsonable(obj):
    """Convert numpy scalars and arrays, tuples and non-finite floats for ``json``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else format_value(obj)
    return obj


def dumps(obj):
    return json.dumps(jsonable(obj), indent=2, sort_keys=True)


def save_json(path, obj):
    with open(path, "w") as handle:
        handle.write(dumps(obj))
        handle.write("\n")
    logger.info("wrote %s", path)


def config_hash(config):
    """SHA-256 of the canonical JSON of a configuration mapping."""
    canonical = json.dumps(jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def versions():
    return {
        "kinfront": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def manifest(command, config, checks, instantiates, outputs=(), extra=None):
    """The record written next to every output file.

    Args:
        command (str): Subcommand name.
        config (dict): Resolved parameters, stored verbatim.
        checks (list): Dicts with at least ``name`` and ``ok``.
        instantiates (str): The formula the outputs evaluate.
        outputs (iterable, optional): File names written by the run.
        extra (dict, optional): Further results, such as fits or summaries.

    Returns:
        dict: The manifest. It holds no timestamps, so reruns are byte-identical.
    """
    record = {
        "command": command,
        "config": config,
        "config_sha256": config_hash(config),
        "versions": versions(),
        "checks": list(checks),
        "ok": all(check["ok"] for check in checks),
        "instantiates": instantiates,
        "outputs": sorted(outputs),
    }
    if extra:
        record["results"] = extra
    return record


def write_field_csv(path, field):
    """Write a :class:`MinPlusField` as ``x[,v],value`` rows."""
    x = field.x.nodes
    if field.v is None:
        save_csv(path, ["x", "value"], zip(x, field.values))
        return
    v = field.v.nodes
    rows = ((x[i], v[j], field.values[i, j]) for i in range(len(x)) for j in range(len(v)))
    save_csv(path, ["x", "v", "value"], rows)


def read_field_csv(path):
    """Read a file written by :func:`write_field_csv` back into a :class:`MinPlusField`."""
    if not os.path.exists(path):
        raise InvalidParameterError("no such field file: {}".format(path))
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        data = np.array([[float(cell) for cell in row] for row in reader])
    if header == ["x", "value"]:
        x = data[:, 0]
        grid = SpatialGrid(float(x[0]), float(x[-1]), len(x))
        return MinPlusField(data[:, 1], grid)
    if header != ["x", "v", "value"]:
        raise InvalidParameterError("unrecognised field header {}".format(header))
    xs, vs = np.unique(data[:, 0]), np.unique(data[:, 1])
    x_grid = SpatialGrid(float(xs[0]), float(xs[-1]), len(xs))
    v_grid = VelocityGrid(float(vs[0]), float(vs[-1]), len(vs))
    return MinPlusField(data[:, 2].reshape(len(xs), len(vs)), x_grid, v_grid)
