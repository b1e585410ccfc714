from __future__ import annotations

from fractions import Fraction


def decimal_label(q: Fraction) -> str:
    """Exact decimal text for terminating fractions, "num/den" otherwise."""
    q = Fraction(q)
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    places = max(twos, fives)
    if places == 0:
        return str(q.numerator)
    scaled = abs(q) * 10**places
    digits = str(scaled.numerator).rjust(places + 1, "0")
    text = f"{digits[:-places]}.{digits[-places:]}".rstrip("0").rstrip(".")
    return ("-" if q < 0 else "") + text


def child_id(parent: str, label: str, root: str = "root") -> str:
    return label if parent == root else f"{parent}|{label}"
