"""Regenerates the bundled scenario files.

Generator and storage parameters are fixed tables. Hourly load, solar and
wind series are synthetic: smooth daily shapes plus seeded noise, netted into
the `net_load` series the solver reads. Tie-line limits and the price
schedule are likewise synthetic choices.

    python3 cases/generate.py
"""

import json
import math
import random
from pathlib import Path

T = 24

GRID_BUY = [0.18] * 6 + [0.22] * 4 + [0.26] * 4 + [0.32] * 6 + [0.26] * 2 + [0.20] * 2
GRID_SELL = [round(0.5 * p, 4) for p in GRID_BUY]
NETWORK = [round(0.5 * (b + s), 4) for b, s in zip(GRID_BUY, GRID_SELL)]


def gen(p_min, p_max, cost, su, nl):
    return dict(p_min=p_min, p_max=p_max, cost=cost, startup_cost=su, noload_cost=nl)


def ess(p_lim, el_min, el_max, comment=None):
    d = dict(p_lim=p_lim, el_min=el_min, el_max=el_max, eta_c=0.96, eta_d=0.98)
    if comment:
        d["comment"] = comment
    return d


def residential(t):
    return 0.55 + 0.25 * math.exp(-((t - 8) ** 2) / 6) + 0.45 * math.exp(-((t - 19) ** 2) / 8)


def commercial(t):
    return 0.45 + 0.55 * math.exp(-((t - 14) ** 2) / 18)


def solar(t):
    return max(0.0, math.sin(math.pi * (t - 6) / 13)) if 6 <= t <= 19 else 0.0


def wind(rng):
    level, out = rng.uniform(0.3, 0.6), []
    for _ in range(T):
        level = min(1.0, max(0.0, level + rng.gauss(0, 0.08)))
        out.append(level)
    return out


def microgrid(mid, rng, shape, load_peak, solar_cap, wind_cap, tie, gens, storage):
    w = wind(rng)
    load = [round(load_peak * shape(t) * (1 + rng.gauss(0, 0.03)), 1) for t in range(T)]
    sol = [round(solar_cap * solar(t), 1) for t in range(T)]
    wnd = [round(wind_cap * w[t], 1) for t in range(T)]
    net = [round(l - s - x, 1) for l, s, x in zip(load, sol, wnd)]
    return dict(
        id=mid,
        tie_limit=tie,
        net_load=net,
        generators=gens,
        storage=storage,
        components=dict(load=load, solar=sol, wind=wnd),
    )


def scenario(name, mgs):
    return dict(
        name=name,
        description="Synthetic 24-hour net-load, tie-line and price data; device tables fixed.",
        horizon=T,
        dt=1.0,
        prices=dict(grid_buy=GRID_BUY, grid_sell=GRID_SELL, network_price=NETWORK),
        microgrids=mgs,
    )


def case1():
    rng = random.Random(101)
    return scenario("case1", [
        microgrid(1, rng, residential, 260, 120, 60, 600,
                  [gen(100, 650, 0.33, 15.0, 11.0), gen(150, 800, 0.28, 13.0, 8.7), gen(0, 0, 0, 0, 0)],
                  [ess(1000, 500, 5000), ess(500, 350, 3500)]),
        microgrid(2, rng, commercial, 1100, 150, 80, 900,
                  [gen(100, 650, 0.33, 15.0, 11.0), gen(150, 800, 0.28, 13.0, 8.7), gen(260, 940, 0.23, 10.35, 7.4)],
                  [ess(800, 420, 4200), ess(400, 240, 2400)]),
        microgrid(3, rng, residential, 180, 140, 40, 500,
                  [gen(250, 900, 0.26, 11.85, 8.45), gen(0, 0, 0, 0, 0), gen(0, 0, 0, 0, 0)],
                  [ess(1000, 500, 5000), ess(500, 350, 3500)]),
        microgrid(4, rng, residential, 90, 110, 20, 400, [],
                  [ess(1000, 500, 5000), ess(500, 350, 3500)]),
    ])


def case2():
    rng = random.Random(202)
    return scenario("case2", [
        microgrid(1, rng, residential, 520, 150, 80, 700,
                  [gen(100, 650, 0.33, 15.0, 11.0), gen(150, 800, 0.28, 13.0, 8.7)],
                  [ess(500, 350, 3500, comment="source table lists el_min=3500, el_max=350000"),
                   ess(500, 350, 3500)]),
        microgrid(2, rng, commercial, 1150, 200, 100, 900,
                  [gen(250, 900, 0.26, 11.85, 8.45), gen(260, 940, 0.23, 10.35, 7.4)],
                  [ess(800, 420, 4200), ess(400, 240, 2400)]),
        microgrid(3, rng, residential, 200, 150, 50, 500,
                  [gen(200, 825, 0.27, 12.0, 8.6), gen(0, 0, 0, 0, 0)],
                  [ess(1000, 500, 5000), ess(400, 240, 2400)]),
    ])


def case3():
    rng = random.Random(303)
    return scenario("case3", [
        microgrid(1, rng, residential, 380, 160, 60, 600,
                  [gen(150, 800, 0.28, 13.0, 8.7), gen(0, 0, 0, 0, 0)],
                  [ess(800, 420, 4200), ess(500, 350, 3500)]),
        microgrid(2, rng, commercial, 420, 180, 60, 700,
                  [gen(260, 940, 0.23, 10.35, 7.4), gen(0, 0, 0, 0, 0)],
                  [ess(500, 350, 3500), ess(400, 240, 2400)]),
        microgrid(3, rng, residential, 300, 150, 60, 600,
                  [gen(100, 650, 0.33, 15.0, 11.85), gen(250, 900, 0.26, 11.85, 8.45)],
                  [ess(800, 420, 4200), ess(400, 240, 2400)]),
        microgrid(4, rng, residential, 80, 120, 30, 400, [],
                  [ess(1000, 500, 5000), ess(500, 350, 3500)]),
    ])


if __name__ == "__main__":
    here = Path(__file__).parent
    for name, build in [("case1", case1), ("case2", case2), ("case3", case3)]:
        (here / f"{name}.json").write_text(json.dumps(build(), indent=2) + "\n")
