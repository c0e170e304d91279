#!/usr/bin/env python3
"""Independent check for exported LP files.

Reads the CPLEX-lp subset the toolkit writes (Minimize/Maximize, Subject To,
Bounds, End; explicit coefficients, one constraint or bound per line), builds
the matrices, and solves with scipy's HiGHS backend. Prints a single line:

    objective <value>     on success
    status <reason>       when the solve does not reach an optimum

Exit code is 0 only for an optimal solve, so callers can trust the output
line without parsing errors apart.
"""

import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix


def try_float(tok):
    try:
        return float(tok)
    except ValueError:
        return None


def parse_terms(tokens):
    """Parses "[+-] coeff name ..." token runs into {name: coeff}."""
    terms = {}
    sign = 1.0
    coeff = None
    for tok in tokens:
        if tok == "+":
            sign = 1.0
            continue
        if tok == "-":
            sign = -1.0
            continue
        num = try_float(tok)
        if num is not None and coeff is None:
            coeff = num
            continue
        terms[tok] = terms.get(tok, 0.0) + sign * (1.0 if coeff is None else coeff)
        sign, coeff = 1.0, None
    return terms


def parse_lp(path):
    sense = 1.0  # +1 minimize, -1 maximize
    obj_tokens = []
    rows = []  # (terms, rel, rhs)
    bounds = {}  # name -> [lo, hi]
    section = None
    done = False
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.split("\\")[0].strip()
            if not line:
                continue
            key = line.lower()
            if key in ("minimize", "min"):
                sense, section = 1.0, "objective"
                continue
            if key in ("maximize", "max"):
                sense, section = -1.0, "objective"
                continue
            if key in ("subject to", "st", "s.t."):
                section = "rows"
                continue
            if key == "bounds":
                section = "bounds"
                continue
            if key == "end":
                done = True
                break
            tokens = line.split()
            if section == "objective":
                obj_tokens.extend(tokens)
            elif section == "rows":
                if tokens and tokens[0].endswith(":"):
                    tokens = tokens[1:]
                for i, tok in enumerate(tokens):
                    if tok in ("<=", ">=", "="):
                        rows.append((parse_terms(tokens[:i]), tok, float(tokens[i + 1])))
                        break
                else:
                    raise ValueError(f"row without a relation: {line}")
            elif section == "bounds":
                if len(tokens) == 2 and tokens[1].lower() == "free":
                    bounds[tokens[0]] = [-np.inf, np.inf]
                elif len(tokens) == 3 and try_float(tokens[0]) is None:
                    name, rel, val = tokens[0], tokens[1], float(tokens[2])
                    lo, hi = bounds.get(name, [0.0, np.inf])
                    if rel == "=":
                        lo = hi = val
                    elif rel == ">=":
                        lo = val
                    elif rel == "<=":
                        hi = val
                    else:
                        raise ValueError(f"malformed bound: {line}")
                    bounds[name] = [lo, hi]
                elif len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
                    lo_tok = tokens[0].lower()
                    lo = -np.inf if lo_tok in ("-inf", "-infinity") else float(tokens[0])
                    bounds[tokens[2]] = [lo, float(tokens[4])]
                else:
                    raise ValueError(f"malformed bound: {line}")
            else:
                raise ValueError(f"content outside any section: {line}")
    if not done:
        raise ValueError("missing End")

    if obj_tokens and obj_tokens[0].endswith(":"):
        obj_tokens = obj_tokens[1:]
    objective = parse_terms(obj_tokens)

    names = []
    index = {}

    def col(name):
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    for name in objective:
        col(name)
    for terms, _, _ in rows:
        for name in terms:
            col(name)
    for name in bounds:
        col(name)
    return sense, objective, rows, bounds, names, index


def main():
    if len(sys.argv) != 2:
        print("status usage: external_lp_solve.py FILE")
        return 2
    sense, objective, rows, bounds, names, index = parse_lp(sys.argv[1])

    n = len(names)
    c = np.zeros(n)
    for name, coeff in objective.items():
        c[index[name]] = sense * coeff

    ub_data, ub_rows, ub_cols, b_ub = [], [], [], []
    eq_data, eq_rows, eq_cols, b_eq = [], [], [], []
    for terms, rel, rhs in rows:
        flip = -1.0 if rel == ">=" else 1.0
        data, rix, rhs_list = (
            (eq_data, (eq_rows, eq_cols), b_eq) if rel == "=" else (ub_data, (ub_rows, ub_cols), b_ub)
        )
        row_id = len(rhs_list)
        for name, coeff in terms.items():
            data.append(flip * coeff)
            rix[0].append(row_id)
            rix[1].append(index[name])
        rhs_list.append(flip * rhs)

    a_ub = csr_matrix((ub_data, (ub_rows, ub_cols)), shape=(len(b_ub), n)) if b_ub else None
    a_eq = csr_matrix((eq_data, (eq_rows, eq_cols)), shape=(len(b_eq), n)) if b_eq else None
    var_bounds = [tuple(bounds.get(name, [0.0, np.inf])) for name in names]

    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=a_eq,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=var_bounds,
        method="highs",
    )
    if res.status != 0:
        print(f"status {res.message}")
        return 1
    print(f"objective {sense * res.fun:.17g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
