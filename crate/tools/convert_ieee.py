"""Converts the IEEE 14- and 30-bus cases shipped with PYPOWER into the
fleetgrid grid format.

Generator prices are the average cost at full output of the published
quadratic curves, c1 + c2 * p_max, rounded to cents. Line limits for the
14-bus case are chosen by this repository (the source case has none) so
that the cheapest generator cannot serve the whole system alone; the
30-bus case keeps its published rateA limits.

Usage: python3 tools/convert_ieee.py PYPOWER_DIR OUT_DIR
"""

import importlib.util
import pathlib
import sys

# Repository-chosen MW limits for the 14-bus case, keyed by (from, to).
IEEE14_LIMITS = {
    (1, 2): 90.0,
    (1, 5): 60.0,
    (2, 4): 45.0,
    (4, 9): 20.0,
    (5, 6): 30.0,
}


def load(pypower_dir, name):
    spec = importlib.util.spec_from_file_location(name, pathlib.Path(pypower_dir) / f"{name}.py")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return getattr(module, name)()


def num(x):
    x = float(x)
    if x == int(x):
        return str(int(x))
    return repr(x)


def convert(case, name, limits):
    out = [
        "fleetgrid-grid 1",
        f"# converted from the IEEE {name[4:]}-bus test case by tools/convert_ieee.py",
        f"name ieee{name[4:]}",
        f"base_mva {num(case['baseMVA'])}",
    ]
    ref = [int(b[0]) for b in case["bus"] if int(b[1]) == 3][0]
    out += [f"ref_bus {ref}", "", "[bus]", "# id load_mw"]
    out += [f"{int(b[0])} {num(b[2])}" for b in case["bus"]]
    out += ["", "[line]", "# from to susceptance_pu flow_min_mw flow_max_mw"]
    for br in case["branch"]:
        f, t, x, rate, tap = int(br[0]), int(br[1]), br[3], br[5], br[8]
        tap = tap if tap != 0 else 1.0
        b = round(1.0 / (x * tap), 6)
        if limits is None:
            lim = rate if 0 < rate < 9900 else None
        else:
            lim = limits.get((f, t))
        lo, hi = ("-inf", "inf") if lim is None else (num(-lim), num(lim))
        out.append(f"{f} {t} {num(b)} {lo} {hi}")
    out += ["", "[gen]", "# bus p_min_mw p_max_mw price_per_mwh"]
    for g, c in zip(case["gen"], case["gencost"]):
        c2, c1 = c[4], c[5]
        price = round(c1 + c2 * g[8], 2)
        out.append(f"{int(g[0])} {num(g[9])} {num(g[8])} {num(price)}")
    return "\n".join(out) + "\n"


def main():
    src, dst = sys.argv[1], pathlib.Path(sys.argv[2])
    (dst / "ieee14.grid").write_text(convert(load(src, "case14"), "case14", IEEE14_LIMITS))
    (dst / "ieee30.grid").write_text(convert(load(src, "case30"), "case30", None))


if __name__ == "__main__":
    main()
