"""Empirical convergence order of rk4 and implicit midpoint on the se(2) metriplectic flow."""

import argparse
from dataclasses import dataclass

from metriplectic.integrate import estimate_order
from metriplectic.models import build_se2_extended


@dataclass
class Config:
    x0: tuple[float, ...] = (0.0, 1.0, 2.0, 1.0)
    dts: tuple[float, ...] = (0.2, 0.1, 0.05)
    t_final: float = 1.0


def run(cfg: Config):
    d = build_se2_extended()
    _, p1, p2, _ = d.chart.coordinates()
    system = d.system(p1, (p1 * p1 + p2 * p2) / 2)
    rows = []
    for dt in cfg.dts:
        for scheme in ("rk4", "midpoint"):
            rows.append((scheme, dt, estimate_order(system, cfg.x0, dt, scheme, cfg.t_final)))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-final", type=float, default=Config.t_final)
    cfg = Config(t_final=ap.parse_args().t_final)
    print(f"{'scheme':9s} {'dt':>6s} {'order':>7s}")
    for scheme, dt, order in run(cfg):
        print(f"{scheme:9s} {dt:6.3f} {order:7.3f}")


if __name__ == "__main__":
    main()
