"""Run manifests: every output embeds (JSON) or accompanies (CSV) a record of
the command line, parameter set, artifact version and a checksum of the
canonical payload.  Reruns with identical manifests produce identical payload
checksums; Monte Carlo runs are covered through their seeds."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from datetime import datetime, timezone

from . import __version__


def canonical_json(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def build_manifest(argv, params):
    return {
        "command": " ".join(argv),
        "params": params,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def attach_checksum(manifest, payload):
    manifest = dict(manifest)
    manifest["payload_sha256"] = hashlib.sha256(
        canonical_json(payload).encode()
    ).hexdigest()
    return manifest


def atomic_write_text(path, text):
    """Write via a temp file and rename: no partial files on error."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
