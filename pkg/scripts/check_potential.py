"""Run the full hypothesis pipeline on a potential given as JSON.

    python3 scripts/check_potential.py '{"kind": "phi8", "m": 5}'
"""
import json
import sys

from kinkstab.config import config_from_dict
from kinkstab.pipeline import analyze


def main():
    spec = json.loads(sys.argv[1]) if len(sys.argv) > 1 else {"kind": "phi4"}
    rep = analyze(config_from_dict({"potential": spec}))
    d = rep.to_dict()
    h1 = d.get("hypothesis1") or {}
    h2 = d.get("hypothesis2") or {}
    h3 = d.get("hypothesis3") or {}
    print(f"verdict: {rep.verdict}")
    print(f"  lambda^2       {h1.get('lambda_sq')}")
    print(f"  Gamma          {h2.get('gamma')}")
    print(f"  witness gamma  {h3.get('witness_gamma')}")
    for msg in rep.failures + rep.errors:
        print(f"  ! {msg}")
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
