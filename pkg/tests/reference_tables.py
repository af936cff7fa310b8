"""Published attack-efficiency tables, transcribed cell by cell.

Each entry maps (discrimination, column label) to the four ratios
(r_d0, r_d1, r_d2, r_d0_opp) and the parameters shown for that sub-table.
"""
from cfqkd.model import Discrimination

NONE, ALL, D1D2, D0D2 = (
    Discrimination.NONE,
    Discrimination.ALL,
    Discrimination.D1D2,
    Discrimination.D0D2,
)

TABLE_I_COLUMNS = ("R=0.5", "R=0.4", "R=0.1")
TABLE_II_COLUMNS = (
    "sigma=0.6, sigma'=0.72, eta_E=0.9",
    "sigma=0.1, sigma'=0.1, eta_E=0.1",
    "sigma=0.1, sigma'=0.1, eta_E=0.9",
)


def _cells(columns, rows):
    out = {}
    for disc, per_column in rows.items():
        for label, (ratios, params) in zip(columns, per_column):
            out[(disc, label)] = (ratios, params)
    return out


TABLE_I = _cells(
    TABLE_I_COLUMNS,
    {
        NONE: [
            ((1.01383, 1.01383, 0.99383, 0.98613), {"x": 0.042, "y": 1.0, "z": 0.668}),
            ((1.02152, 0.99747, 0.98426, 0.97848), {"x": 0.041, "y": 1.0, "z": 0.472}),
            ((1.03706, 0.96286, 0.96497, 0.96228), {"x": 0.039, "y": 1.0, "z": 0.024}),
        ],
        ALL: [
            ((1.0, 1.0, 0.96570, 0.96119), {"x": 0.039, "y": 1.0}),
            ((1.0, 1.0, 0.96551, 0.96123), {"x": 0.039, "y": 1.0}),
            ((1.0, 1.0, 0.96497, 0.96135), {"x": 0.039, "y": 1.0}),
        ],
        D1D2: [
            ((0.96119, 1.0, 0.96570, 0.96119), {"x": 0.039, "y": 1.0}),
            ((0.96123, 1.0, 0.96551, 0.96123), {"x": 0.039, "y": 1.0}),
            ((0.96135, 1.0, 0.96497, 0.96135), {"x": 0.039, "y": 1.0}),
        ],
        D0D2: [
            ((1.0, 0.96119, 0.96570, 1.0), {"x": 0.039, "y": 1.0, "z0": 0.02005}),
            ((1.0, 0.96123, 0.96551, 1.0), {"x": 0.039, "y": 1.0, "z0": 0.01672}),
            ((1.0, 0.96135, 0.96497, 1.0), {"x": 0.039, "y": 1.0, "z0": 0.01116}),
        ],
    },
)

TABLE_II = _cells(
    TABLE_II_COLUMNS,
    {
        NONE: [
            ((1.00850, 1.00850, 0.99433, 0.99149), {"x": 0.028, "y": 1.0, "z": 0.682}),
            ((1.01680, 1.01680, 0.98335, 0.98315), {"x": 0.051, "y": 1.0, "z": 0.668}),
            ((1.00182, 1.00182, 1.0, 0.99818), {"x": 0.006, "y": 0.95236, "z": 0.682}),
        ],
        ALL: [
            ((1.0, 1.0, 0.98024, 0.97419), {"x": 0.027, "y": 1.0}),
            ((1.0, 1.0, 0.95492, 0.95224), {"x": 0.048, "y": 1.0}),
            ((1.0, 1.0, 1.0, 0.99426), {"x": 0.006, "y": 0.95236}),
        ],
        D1D2: [
            ((0.97419, 1.0, 0.98024, 0.97419), {"x": 0.027, "y": 1.0}),
            ((0.95224, 1.0, 0.95492, 0.95224), {"x": 0.048, "y": 1.0}),
            ((0.99426, 1.0, 1.0, 0.99426), {"x": 0.006, "y": 0.95236}),
        ],
        D0D2: [
            ((1.0, 0.97419, 0.98024, 1.0), {"x": 0.027, "y": 1.0, "z0": 0.08167}),
            ((1.0, 0.95224, 0.95492, 1.0), {"x": 0.048, "y": 1.0, "z0": 0.02005}),
            ((1.0, 0.99426, 1.0, 1.0), {"x": 0.006, "y": 0.95236, "z0": 0.00227}),
        ],
    },
)

RATIO_TOL = 0.002
PARAM_TOL = {"x": 0.002, "z": 0.002, "y": 0.001, "z0": 0.001}
