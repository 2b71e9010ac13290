"""Reference values for the test suite, computed independently of the Rust code.

Closed forms are evaluated with 50-digit mpmath arithmetic; cost minimization
is done numerically on the primal problem; golden-run statistics are
recomputed with pandas from the frozen CSV.

    python3 oracles/derive.py > oracles/values.json
"""

import json
import pathlib

import mpmath as mp
import pandas as pd

mp.mp.dps = 50
ROOT = pathlib.Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "crates" / "core" / "tests" / "golden" / "baseline_150.csv"

TECH = {"high": (mp.mpf("0.35"), mp.mpf("0.75")), "low": (mp.mpf("0.65"), mp.mpf("1.5"))}
WAGE = mp.mpf(8)
RENTALS = ["0.6", "0.8", "1.0", "1.2", "1.4"]


def unit_cost(share, sigma, r, w, tfp=1):
    e = 1 - sigma
    inner = share**sigma * r**e + (1 - share) ** sigma * w**e
    return inner ** (1 / e) / tfp


def ai_share(share, sigma, r, w):
    e = 1 - sigma
    ai = share**sigma * r**e
    return ai / (ai + (1 - share) ** sigma * w**e)


def output(share, sigma, k, l, tfp=1):
    rho = (sigma - 1) / sigma
    return tfp * (share * k**rho + (1 - share) * l**rho) ** (1 / rho)


def primal_cost(share, sigma, r, w, tfp=1):
    """min r K + w L s.t. Q(K, L) = 1, by minimizing over log(K/L)."""

    def cost(z):
        x = mp.e**z
        l = 1 / output(share, sigma, x, 1, tfp)
        return (r * x + w) * l

    z = mp.findroot(lambda z: mp.diff(cost, z), 0)
    return cost(z)


def s(x):
    return mp.nstr(x, 30, strip_zeros=False)


def main():
    out = {}
    r1 = mp.mpf(1)
    for name, (d, sig) in TECH.items():
        out[f"unit_cost_{name}"] = s(unit_cost(d, sig, r1, WAGE))
        out[f"primal_cost_{name}"] = s(primal_cost(d, sig, r1, WAGE))
        out[f"ai_share_{name}"] = [s(ai_share(d, sig, mp.mpf(r), WAGE)) for r in RENTALS]
        # elasticity of unit cost with respect to r, by central difference in logs
        out[f"cost_elasticity_{name}"] = s(
            mp.diff(lambda lr: mp.log(unit_cost(d, sig, mp.e**lr, WAGE)), 0)
        )
    e = mp.e
    out["logit_certain_high"] = s(e / (1 + e))
    c_low = unit_cost(*TECH["low"], r1, WAGE)
    out["unit_profit_low_default"] = s((1 - mp.mpf("0.25")) * 4 * 1 - c_low)
    out["posterior_low_signal"] = s(mp.mpf("0.6") * mp.mpf("0.1") / (mp.mpf("0.6") * mp.mpf("0.1") + mp.mpf("0.4") * mp.mpf("0.9")))
    out["threshold_example"] = s(mp.mpf("0.3") * mp.mpf("0.5") + mp.mpf("0.7") * 2)
    out["tech_risk_ratio_two"] = s((1 + mp.tanh(mp.log(2))) / 2)
    out["signal_example"] = s(mp.mpf("0.85") - mp.mpf("0.3") * mp.mpf("0.5") + mp.mpf("0.1") * mp.mpf("0.4"))
    out["trust_example"] = s(mp.mpf("0.5") - mp.mpf("0.2") * mp.mpf("0.5") + mp.mpf("0.01") - mp.mpf("0.05") * mp.mpf("0.5"))
    out["pigouvian_example"] = s(mp.mpf("0.8") * mp.mpf("0.8") + 10 * mp.mpf("0.01"))
    out["adaptive_example"] = s(mp.mpf("0.5") + mp.mpf("0.1") * (mp.mpf("0.8") - mp.mpf("0.4")) / mp.mpf("0.4"))
    out["composite_example"] = s(
        sum(mp.mpf(w) * mp.mpf(i) for w, i in zip(["0.35", "0.25", "0.25", "0.15"], ["0.6", "0.5", "0.7", "0.4"]))
    )
    out["churn_example"] = s((mp.mpf("0.12") - mp.mpf("0.08")) / mp.mpf("0.10"))
    out["harm_mixed_log"] = s((1 * 30 + 3 * 12 + 10 * 2) / mp.mpf(400))

    run = pd.read_csv(GOLDEN)
    out["golden_rows"] = int(len(run))
    out["golden_corr_ipi_welfare"] = repr(float(run["ipi"].corr(run["welfare"])))
    tail = run.tail(20)
    out["golden_final_ipi"] = repr(float(tail["ipi"].mean()))
    out["golden_final_welfare"] = repr(float(tail["welfare"].mean()))
    out["golden_max_final_step"] = repr(float(tail["ipi"].diff().abs().max()))
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
