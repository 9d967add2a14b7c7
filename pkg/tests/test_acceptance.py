"""One test per acceptance criterion, each at its stated tolerance."""

import io
import time

import numpy as np
import pytest

from orliczlab import certify as C
from orliczlab import cli
from orliczlab import inequality as I
from orliczlab import testfunctions as TF
from orliczlab.family import FamilySpec, build_family, gross_lambda, gross_lp, log_F, validate_family
from orliczlab.measure import build_u_alpha, constant_family, entropy, gaussian, inhomog_example, integrate
from orliczlab.measure import polynomial_potential
from orliczlab.semigroup import gradient_bound_check
from orliczlab.young import power


def test_gross_chain(acceptance):
    t0 = time.perf_counter()
    rep = C.gross_orlicz_verify(C.HyperExperiment(gross_lp(rho=2.0, q0=2.0), gaussian(), TF.bundled(),
                                                  np.linspace(0.0, 2.0, 21), mono_tol=1e-6))
    elapsed = time.perf_counter() - t0
    worst = min(r["mono_slack"] for r in rep.rows)
    sat = 0.0
    for name in ("exp_a0.5", "exp_a1", "exp_a2"):
        N = np.array([r["N"] for r in rep.rows if r["f"] == name])
        sat = max(sat, float(np.max(np.abs(N / N[0] - 1))))
    ok = len({r["f"] for r in rep.rows}) == 12 and worst >= -1e-6 and sat <= 1e-5 and elapsed < 60
    acceptance(1, ok, f"min_slack={worst:.3e} saturation={sat:.3e} runtime={elapsed:.1f}s")
    assert ok


def test_gaussian_lsi_equality(acceptance):
    worst = 0.0
    for a in (0.5, 1.0, 2.0):
        f = TF.f_a(a)
        ent = entropy(lambda x: f(x) ** 2, gaussian())
        energy, _ = integrate(lambda x: f.grad(x) ** 2, gaussian())
        worst = max(worst, abs(ent / (2 * energy) - 1))
    ok = worst <= 1e-6
    acceptance(2, ok, f"max_rel_gap={worst:.3e}")
    assert ok


def test_standard_family_reconstruction(acceptance, gross_family):
    ts = np.linspace(0.0, 2.0, 41)
    x = np.logspace(-2, 2, 401)
    rec = max(float(np.max(np.abs(gross_family.at(t)(x) / x ** (1 + np.exp(2 * t)) - 1))) for t in ts)
    rep = validate_family(gross_family, ts)
    ok = rec <= 1e-6 and rep.iii_residual <= 1e-5 and rep.iv_violation <= 1e-8
    acceptance(3, ok, f"reconstruction={rec:.3e} iii={rep.iii_residual:.3e} iv={rep.iv_violation:.3e}")
    assert ok


def test_unconditional_inequalities(acceptance):
    tests = TF.bundled()
    Us = [gaussian(), build_u_alpha(1.5), polynomial_potential([0.0, 0.0, 1.0]),
          polynomial_potential([0.0, 0.0, 0.5, 0.0, 0.25])]
    ub = min(I.eval_ubound(f, U).slack for U in Us for f in tests)
    mu = I.gaussian_measure()
    roth = min(I.eval_rothaus(f, mu).slack for f in tests)
    bg = all(r.passed for f in tests for r in I.eval_bg(f, mu))
    fa = all(I.eval_fa(a).passed for a in (1.0, 2.0, 3.0, 4.0))
    ok = ub >= -1e-8 and roth >= -1e-8 and bg and fa
    acceptance(4, ok, f"ubound_min={ub:.3e} rothaus_min={roth:.3e} sandwich={int(bg)} fa={int(fa)}")
    assert ok


def test_closed_form_hyperbound(acceptance):
    m, chk = C.hyperbound_factor(1.0, 0.5, 1.0, 0.0, 1.0, 1.0)
    target = np.exp(-np.sqrt(np.log(2)) + np.log(2) + 0.25)
    err = abs(m / target - 1)
    ok = err <= 1e-12 and chk["rel_gap"] <= 1e-2 and chk["slope_spread"] <= 1e-6
    acceptance(5, ok, f"m={m:.15g} rel_err={err:.1e} path_gap={chk['rel_gap']:.1e} "
                      f"slope_spread={chk['slope_spread']:.1e}")
    assert ok


def test_inhomogeneous_bound(acceptance):
    fam = inhomog_example(beta=0.5, alpha_rate=0.1)
    consts = C.inhomog_constants(fam, np.linspace(0.0, 1.0, 101))
    a_zero = bool(np.all(consts.a == 0))
    b_gap = float(np.max(np.abs(consts.b - consts.b_analytic)))
    rep = C.inhomog_verify(fam, 2.0, TF.bundled(), 0.0, 1.0, consts=consts, tol=1e-6)
    # degenerate: a time-independent Gaussian has a = b = c = 0 and rho = 1
    deg = C.inhomog_constants(constant_family(gaussian()), np.linspace(0.0, 1.0, 11))
    q, m, _ = C.inhomog_qm(2.0, None, deg, 0.0, 1.0)
    deg_ok = q == 1 + np.e and m == 1.0
    ok = a_zero and b_gap <= 1e-6 and rep.passed and len(rep.rows) == 12 and deg_ok
    acceptance(6, ok, f"a=0:{int(a_zero)} b_gap={b_gap:.1e} min_slack={min(r['slack'] for r in rep.rows):.3e} "
                      f"degenerate q={q!r} m={m!r}")
    assert ok


def test_gradient_commutation(acceptance):
    pot = gaussian()
    worst = min(gradient_bound_check(f, None, pot, t, df=f.grad).slack
                for f in TF.bundled() for t in (0.1, 0.5, 1.0))
    eq = gradient_bound_check(lambda x: x + 10, None, pot, 0.5, df=lambda x: np.ones_like(x))
    ok = worst >= -1e-8 and abs(eq.slack) <= 1e-8
    acceptance(7, ok, f"min_slack={worst:.3e} equality_slack={eq.slack:.1e}")
    assert ok


def test_talagrand_tail(acceptance):
    rep = C.talagrand_tail(TF.nonnegative(), t=0.5, s_grid=np.geomspace(2.0, 1e3, 200))
    finite = all(np.isfinite(r["sup_product"]) for r in rep.rows)
    change = max(r["rel_change"] for r in rep.rows)
    markov = max(r["markov_max"] for r in rep.rows)
    ok = finite and change < 0.05 and markov <= 1 + 1e-8
    acceptance(8, ok, f"finite={int(finite)} max_refinement_change={change:.1e} markov_max={markov:.6f}")
    assert ok


def test_non_continuity_witness(acceptance):
    # expected to fail: the ratio has its minimum near a = 4 (see README)
    rep = C.non_continuity_witness(np.arange(1.0, 7.0), t=0.5)
    r = np.array([row["ratio"] for row in rep.rows])
    ok = bool(np.all(r[1:] / r[:-1] - 1 > 1e-6))
    acceptance(9, ok, "ratios=" + ",".join(f"{v:.6f}" for v in r))
    assert ok


@pytest.mark.parametrize("name", ["gross_lp", "ualpha_fbeta"])
def test_determinism(acceptance, tmp_path, name):
    cfg = cli.load_config(cli.bundled_config(name))
    codes = [cli.run_config(cfg, tmp_path / d, stream=io.StringIO()) for d in ("a", "b")]
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    same = files == sorted(p.name for p in (tmp_path / "b").iterdir()) and all(
        (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes() for n in files)
    ok = same and codes[0] == codes[1] == 0
    acceptance(10, ok, f"{name}: {len(files)} files identical={int(same)} exit={codes}")
    assert ok
