"""Smoke test for the dcl_py extension module.

Build the module first:

    cargo build -p dcl-py --release

The script locates the cdylib in target/, stages it under an importable
name, and exercises the main entry points.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    candidates = [
        ROOT / "target" / "release" / "libdcl_py.so",
        ROOT / "target" / "debug" / "libdcl_py.so",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("libdcl_py.so not found; run `cargo build -p dcl-py --release` first")
    stage = Path(tempfile.mkdtemp(prefix="dcl_py_"))
    shutil.copy(lib, stage / "dcl_py.so")
    sys.path.insert(0, str(stage))


stage_module()

import dcl_py  # noqa: E402

EQ = math.pi / 3


def check(name, ok, detail=""):
    status = "ok" if ok else "FAIL"
    print(f"{name}: {status} {detail}")
    if not ok:
        sys.exit(1)


# lattice geometry
lat = dcl_py.Lattice(EQ, EQ, 0.1)
check("lattice angles", abs(lat.gamma - EQ) < 1e-15)
p10 = lat.position(1, 0)
check("position(1,0)", abs(p10 - 0.1 * lat.length(1)) < 1e-15, f"{p10}")
q = lat.lattice_cross_ratio(1)
prod = q * lat.lattice_cross_ratio(2) * lat.lattice_cross_ratio(3)
check("Q1 Q2 Q3 = 1", abs(prod - 1) < 1e-14, f"{prod}")
check(
    "laplacian constant",
    abs(lat.laplacian_constant - 1.5 * math.sin(2 * EQ)) < 1e-14,
)

# invalid geometry is rejected
try:
    dcl_py.Lattice(2.0, 2.0, 0.1)
    check("acuteness enforced", False)
except ValueError:
    check("acuteness enforced", True)

# a solved map for exp
m = dcl_py.ConformalMap.solve("exp", EQ, EQ, 0.05, 0.5)
check("vertex count", m.vertex_count() > 100, f"{m.vertex_count()}")
check("residual", m.max_residual < 1e-11, f"{m.max_residual:.2e}")
check("normalization", abs(m.value(0, 0) - 1.0) < 1e-12, f"{m.value(0, 0)}")

z = 0.12 + 0.07j
err = abs(m.evaluate(z) - complex(math.e) ** z)
check("evaluate vs exp", err < 5e-3, f"err {err:.2e}")

s = m.schwarzian(0, 0, 1)
s_pred = dcl_py.predicted_schwarzians("exp", EQ, EQ, 0j)[0]
check("schwarzian near limit", abs(s - s_pred) < 5e-3, f"{s} vs {s_pred}")

# cross-ratio utility
cr = dcl_py.cross_ratio(0j, 1 + 0j, 1 + 1j, 1j)
check("square cross-ratio", abs(cr + 1) < 1e-15, f"{cr}")

# a tiny sweep through the harness
report = dcl_py.run_sweep("quadratic", 1.1, 1.0, [0.2, 0.14, 0.1], 0.5, params=[0.3, 0.0])
rows = report["rows"]
check("sweep rows", len(rows) == 3 and not report["failures"])
check(
    "errors decrease",
    rows[-1]["err_u_max"] < rows[0]["err_u_max"],
    f'{rows[0]["err_u_max"]:.2e} -> {rows[-1]["err_u_max"]:.2e}',
)
check("order_u fitted", report["order_u"] is not None and report["order_u"] > 1.0,
      f'{report["order_u"]:.2f}')

print("all smoke tests passed")
