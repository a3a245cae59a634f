"""Standalone MIP solver process: reads an LP file, solves it with HiGHS
(via scipy.optimize.milp), writes a 'name value' solution file.

Usage: ppdsp-highs MODEL.lp SOLUTION.sol [TIME_LIMIT_S]

The solution file starts with '# status <Status>' and '# objective <value>'
comment lines, followed by one 'name value' line per nonzero variable.
"""

from __future__ import annotations

import sys

import numpy as np

SECTIONS = ("maximize", "minimize", "subject to", "bounds", "generals",
            "binaries", "end")


class LpParseError(ValueError):
    pass


def _split_sections(text: str) -> dict[str, list[str]]:
    sections: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low in SECTIONS:
            current = low
            sections.setdefault(current, [])
            continue
        if current is None:
            raise LpParseError(f"content before first section: {line!r}")
        sections[current].append(line)
    return sections


def _parse_terms(tokens: list[str]) -> list[tuple[str, float]]:
    """Parse '3 x + y - 2 z' style linear expressions."""
    terms: list[tuple[str, float]] = []
    sign = 1.0
    coef: float | None = None
    for tok in tokens:
        if tok == "+":
            sign, coef = 1.0, None
        elif tok == "-":
            sign, coef = -1.0, None
        else:
            try:
                value = float(tok)
            except ValueError:
                terms.append((tok, sign * (1.0 if coef is None else coef)))
                sign, coef = 1.0, None
            else:
                if coef is not None:
                    raise LpParseError(f"two consecutive numbers near {tok!r}")
                coef = value
    if coef is not None:
        raise LpParseError("dangling coefficient at end of expression")
    return terms


def _bound_value(tok: str) -> float:
    low = tok.lower()
    if low in ("-inf", "-infinity"):
        return float("-inf")
    if low in ("+inf", "inf", "infinity"):
        return float("inf")
    return float(tok)


def parse_lp(text: str):
    """Returns (sense, objective terms, rows, bounds, integer names, binary
    names) where rows are (name, terms, sense, rhs)."""
    sections = _split_sections(text)
    if "maximize" in sections:
        sense = "max"
        objective_lines = sections["maximize"]
    elif "minimize" in sections:
        sense = "min"
        objective_lines = sections["minimize"]
    else:
        raise LpParseError("no objective section")
    obj_tokens: list[str] = []
    for line in objective_lines:
        _, _, rest = line.partition(":")
        obj_tokens.extend((rest if rest or ":" in line else line).split())
    objective = _parse_terms(obj_tokens)

    rows = []
    for line in sections.get("subject to", []):
        name, colon, rest = line.partition(":")
        if not colon:
            raise LpParseError(f"constraint without name: {line!r}")
        tokens = rest.split()
        op_index = next((i for i, t in enumerate(tokens) if t in ("<=", ">=", "=")),
                        None)
        if op_index is None:
            raise LpParseError(f"constraint without comparator: {line!r}")
        terms = _parse_terms(tokens[:op_index])
        rhs = float(tokens[op_index + 1])
        rows.append((name.strip(), terms, tokens[op_index], rhs))

    bounds: dict[str, tuple[float, float]] = {}
    for line in sections.get("bounds", []):
        tokens = line.split()
        if len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
            bounds[tokens[2]] = (_bound_value(tokens[0]), _bound_value(tokens[4]))
        elif len(tokens) == 3 and tokens[1] == "=":
            value = _bound_value(tokens[2])
            bounds[tokens[0]] = (value, value)
        else:
            raise LpParseError(f"unsupported bound line: {line!r}")

    integers = [t for line in sections.get("generals", []) for t in line.split()]
    binaries = [t for line in sections.get("binaries", []) for t in line.split()]
    return sense, objective, rows, bounds, integers, binaries


def solve_lp_text(text: str, time_limit_s: float | None = None):
    """Returns (status string, objective value or None, {name: value})."""
    from scipy import optimize, sparse

    sense, objective, rows, bounds, integers, binaries = parse_lp(text)
    names: list[str] = []
    index: dict[str, int] = {}

    def intern(name: str) -> int:
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    for name, _ in objective:
        intern(name)
    for _, terms, _, _ in rows:
        for name, _ in terms:
            intern(name)
    for name in list(bounds) + integers + binaries:
        intern(name)

    num = len(names)
    c = np.zeros(num)
    for name, coef in objective:
        c[index[name]] += coef
    if sense == "max":
        c = -c

    lower = np.zeros(num)
    upper = np.full(num, np.inf)
    binary_set = set(binaries)
    for name in binaries:
        upper[index[name]] = 1.0
    for name, (lo, hi) in bounds.items():
        if name in binary_set:
            lower[index[name]] = max(0.0, lo)
            upper[index[name]] = min(1.0, hi)
        else:
            lower[index[name]] = lo
            upper[index[name]] = hi

    integrality = np.zeros(num)
    for name in integers + binaries:
        integrality[index[name]] = 1

    constraints = []
    if rows:
        data, row_idx, col_idx, lo_rhs, hi_rhs = [], [], [], [], []
        for i, (_, terms, op, rhs) in enumerate(rows):
            for name, coef in terms:
                data.append(coef)
                row_idx.append(i)
                col_idx.append(index[name])
            if op == "<=":
                lo_rhs.append(-np.inf)
                hi_rhs.append(rhs)
            elif op == ">=":
                lo_rhs.append(rhs)
                hi_rhs.append(np.inf)
            else:
                lo_rhs.append(rhs)
                hi_rhs.append(rhs)
        matrix = sparse.csr_matrix((data, (row_idx, col_idx)),
                                   shape=(len(rows), num))
        constraints = [optimize.LinearConstraint(matrix, lo_rhs, hi_rhs)]

    options = {}
    if time_limit_s is not None:
        options["time_limit"] = float(time_limit_s)
    result = optimize.milp(c, constraints=constraints,
                           bounds=optimize.Bounds(lower, upper),
                           integrality=integrality, options=options)

    if result.status == 0:
        status = "Optimal"
    elif result.status == 1:
        status = "Feasible" if result.x is not None else "TimeLimit"
    elif result.status == 2:
        status = "Infeasible"
    else:
        status = "Error"
    if result.x is None:
        return status, None, {}
    objective_value = float(result.fun)
    if sense == "max":
        objective_value = -objective_value
    values = {names[i]: float(result.x[i]) for i in range(num)}
    return status, objective_value, values


def main(argv: list[str] | None = None) -> int:
    args = sys.argv[1:] if argv is None else argv
    if len(args) not in (2, 3):
        print(__doc__, file=sys.stderr)
        return 2
    model_path, solution_path = args[0], args[1]
    time_limit = float(args[2]) if len(args) == 3 else None
    with open(model_path) as fh:
        text = fh.read()
    status, objective, values = solve_lp_text(text, time_limit)
    with open(solution_path, "w") as fh:
        fh.write(f"# status {status}\n")
        if objective is not None:
            fh.write(f"# objective {objective!r}\n")
        for name, value in values.items():
            if value != 0.0:
                fh.write(f"{name} {value!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
