"""Text labels for every built-in landscape.

Grammar::

    sphere | sphere:<d> | fz | rosenbrock
    elliptic:<c1>,...,<cd>
    neg:<label>
    homeo:rosen(<label>) | homeo:lin(<a1>,...,<ad>)(<label>) | homeo:id(<label>)
"""

from __future__ import annotations

from valleyscape.errors import ConfigError
from valleyscape.landscape import (
    EllipticParams,
    Landscape,
    degenerate_valley,
    identity_map,
    linear_map,
    make_elliptic,
    make_transformed,
    negate,
    rosenbrock,
    rosenbrock_map,
    sphere,
)

DESCRIPTIONS = {
    "sphere": "x1^2 + ... + xd^2 (d from the domain, default 2); also sphere:<d>",
    "elliptic:<c1,...,cd>": "sum of c_i * x_i^2, e.g. elliptic:1,0.01 = x1^2 + (0.1 x2)^2",
    "fz": "x1^2 on R^2 (degenerate valley along the x2 axis)",
    "rosenbrock": "(1 - x1)^2 + 100 (x2 - x1^2)^2",
    "neg:<label>": "negated landscape; ridges of <label> become valleys",
    "homeo:rosen(<label>)": "pull <label> through y1 = 1 - x1, y2 = x2 + (1 - x1)^2",
    "homeo:lin(<a1,...,ad>)(<label>)": "pull <label> through y_i = a_i * x_i",
    "homeo:id(<label>)": "identity transform of <label>",
}


class UnknownFunctionError(ConfigError):
    def __init__(self, label: str):
        known = "\n  ".join(DESCRIPTIONS)
        super().__init__(f"unknown function label {label!r}; available labels:\n  {known}")


def _floats(text: str, label: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UnknownFunctionError(label) from None


def _split_parens(text: str, label: str) -> tuple[str, str]:
    """Split ``(inner)rest`` at the matching closing parenthesis."""
    if not text.startswith("("):
        raise UnknownFunctionError(label)
    depth = 0
    for i, ch in enumerate(text):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0:
            return text[1:i], text[i + 1:]
    raise UnknownFunctionError(label)


def parse_function(label: str, dimension: int | None = None) -> Landscape:
    """Build the landscape named by ``label``.

    ``dimension`` only matters for ``sphere``; other labels fix their own
    dimension.
    """
    label = label.strip()
    if label == "sphere":
        return sphere(dimension or 2)
    if label.startswith("sphere:"):
        try:
            return sphere(int(label[7:]))
        except ValueError:
            raise UnknownFunctionError(label) from None
    if label == "fz":
        return degenerate_valley()
    if label == "rosenbrock":
        return rosenbrock()
    if label.startswith("elliptic:"):
        coeffs = _floats(label[9:], label)
        return make_elliptic(EllipticParams(tuple(coeffs), allow_zero=0.0 in coeffs))
    if label.startswith("neg:"):
        return negate(parse_function(label[4:], dimension))
    if label.startswith("homeo:"):
        rest = label[6:]
        if rest.startswith("rosen"):
            inner, tail = _split_parens(rest[5:], label)
            h = rosenbrock_map()
        elif rest.startswith("id"):
            inner, tail = _split_parens(rest[2:], label)
            h = None
        elif rest.startswith("lin"):
            args, rest2 = _split_parens(rest[3:], label)
            inner, tail = _split_parens(rest2, label)
            h = linear_map(_floats(args, label))
        else:
            raise UnknownFunctionError(label)
        if tail:
            raise UnknownFunctionError(label)
        base = parse_function(inner, dimension if h is None else h.dimension)
        return make_transformed(base, h or identity_map(base.dimension))
    raise UnknownFunctionError(label)


def split_labels(text: str) -> list[str]:
    """Split a comma-separated label list, keeping numeric parameters attached.

    ``"elliptic:1,0.01,sphere"`` gives ``["elliptic:1,0.01", "sphere"]``.
    """
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
            continue
        depth += (ch == "(") - (ch == ")")
        cur += ch
    parts.append(cur)
    labels: list[str] = []
    for p in parts:
        try:
            float(p)
            numeric = True
        except ValueError:
            numeric = False
        if numeric and labels:
            labels[-1] += "," + p
        else:
            labels.append(p.strip())
    return [lab for lab in labels if lab]
