"""Frozen data shared by the chain tests, the CLI tests, and acceptance."""

# The explicit 8-basis chain on <1,1,1,1> over GF(4) connecting the standard
# basis e to the hat basis (hat_e_r = sum of e_i, i != r).  Symbols: 0, 1,
# a (the GF(4) generator), b = 1 + a.
F4_CHAIN_ROWS = [
    ["1000", "0100", "0010", "0001"],
    ["ab00", "ba00", "0010", "0001"],
    ["1aa0", "ba00", "b1b0", "0001"],
    ["b11a", "ba00", "b1b0", "abbb"],
    ["b11a", "ba00", "1ab1", "00ba"],
    ["b11a", "1ba1", "1ab1", "a11b"],
    ["b11a", "1011", "1101", "a11b"],
    ["0111", "1011", "1101", "1110"],
]

_SYMBOL = {"0": [], "1": [1], "a": [0, 1], "b": [1, 1]}


def f4_chain_certificate():
    """The chain above as a witt-lab chain certificate JSON object."""
    gram = [
        [[1] if i == j else [] for j in range(4)]
        for i in range(4)
    ]
    bases = [
        [[_SYMBOL[c] for c in vec] for vec in row]
        for row in F4_CHAIN_ROWS
    ]
    return {"ring": "GF(4)", "gram": gram, "bases": bases}
