"""Atomic file output shared by the writers."""
import json
import os
import tempfile


def atomic_write_bytes(path, data):
    """Write via a temp file in the target directory, then rename over ``path``."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def dump_json(obj, path):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
