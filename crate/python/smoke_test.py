#!/usr/bin/env python3
"""Smoke test for the graphon_lab_py extension module.

Builds nothing itself: run `cargo build --release -p graphon-lab-py` first
(or pass --debug to use the debug artifact). The script stages the cdylib
under the importable module name and exercises the main surface.
"""

import math
import pathlib
import shutil
import subprocess
import sys
import sysconfig
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def stage_module(profile: str) -> pathlib.Path:
    libname = "libgraphon_lab_py.so"
    if sys.platform == "darwin":
        libname = "libgraphon_lab_py.dylib"
    built = ROOT / "target" / profile / libname
    if not built.exists():
        print(f"building graphon-lab-py ({profile}) ...")
        args = ["cargo", "build", "-p", "graphon-lab-py"]
        if profile == "release":
            args.append("--release")
        subprocess.run(args, cwd=ROOT, check=True)
    stage = pathlib.Path(tempfile.mkdtemp(prefix="graphon_lab_py_"))
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy2(built, stage / f"graphon_lab_py{suffix}")
    # Plain `.so` fallback for interpreters that accept it.
    shutil.copy2(built, stage / "graphon_lab_py.so")
    return stage


def approx(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol


def main() -> int:
    profile = "debug" if "--debug" in sys.argv else "release"
    sys.path.insert(0, str(stage_module(profile)))
    import graphon_lab_py as gl

    # Norms and embedding consistency.
    k3 = gl.WeightedGraph.complete(3)
    assert approx(k3.lp_norm(1.0), 2.0 / 3.0)
    w_k3 = gl.embed_graph(k3)
    for p in (1.0, 2.0, 4.0):
        assert approx(k3.lp_norm(p), w_k3.lp_norm(p), 1e-12)

    # Cut norm of the checkerboard and the sandwich.
    cb = gl.StepGraphon([0.5, 0.5], [[1.0, -1.0], [-1.0, 1.0]])
    cut = gl.cut_norm_exact(cb)
    assert approx(cut.lower, 0.25)
    inf1 = gl.infty_to_one_norm(cb)
    assert approx(inf1.lower, 1.0)
    assert cut.lower <= inf1.lower <= 4.0 * cut.lower + 1e-9

    # Cut distance between a graphon and a constant shift.
    shifted = gl.StepGraphon([0.5, 0.5], [[1.3, -0.7], [-0.7, 1.3]])
    d = gl.d_cut(cb, shifted)
    assert approx(d.lower, 0.3, 1e-9)

    # Sampling is deterministic in the seed.
    two_block = gl.StepGraphon([0.5, 0.5], [[0.8, 0.2], [0.2, 0.6]])
    h1 = gl.sample_h(60, two_block, 7)
    h2 = gl.sample_h(60, two_block, 7)
    assert h1.to_tsv() == h2.to_tsv()
    g = gl.sample_g(60, two_block, 0.5, 7)
    assert g.edge_count <= h1.edge_count

    # Homomorphism densities.
    assert approx(gl.hom_density_graph("K3", k3), 6.0 / 27.0, 1e-12)
    assert approx(gl.hom_density("K3", gl.StepGraphon.constant(0.5)), 0.125, 1e-12)
    assert approx(gl.counting_bound("K3", 4.0, 0.01), 2.4, 1e-12)

    # Weak regularity on the checkerboard resolves in one refinement.
    report = gl.weak_regularity_l2(cb, 0.1)
    assert report.certified and report.error_cut < 1e-9

    # Upper-regularity checker pins the K3 example.
    verdict = gl.check_upper_regular_exact(k3, 0.5, 0.5, 2.0)
    assert verdict.status == "verified_exact"

    # Chernoff bound formula.
    assert approx(gl.chernoff_bound([0.5] * 60, [1] * 60, 1.0), 2.0 * math.exp(-10.0))

    print("graphon_lab_py smoke test: OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
