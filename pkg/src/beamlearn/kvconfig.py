"""Tiny key=value config file reader/writer.

One `key = value` pair per line. Blank lines and lines starting with '#'
are ignored. Values are kept as strings; callers convert.
"""

from __future__ import annotations


def read_kv_file(path) -> dict:
    kv = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if not key:
                raise ValueError(f"{path}:{lineno}: empty key")
            if key in kv:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            kv[key] = value.strip()
    return kv


def write_kv_file(path, kv: dict):
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in kv.items():
            fh.write(f"{key} = {value}\n")
