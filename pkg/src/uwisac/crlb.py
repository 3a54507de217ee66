"""Fusion of the per-path information matrices and bound extraction.

Three fusion cases cover the measurement availability variants:

* Case 1: passive bearing information from both nodes, no bistatic path.
* Case 2: both passive paths plus the bistatic path.
* Case 3: bistatic path alone (signal used purely for sensing).

Independent measurements add at the information level, so fusion is a matrix
sum.  Case 1 carries no Doppler-scale information at all; its bound inverts
only the 2x2 position block and reports the Doppler scale as unobservable
instead of pseudo-inverting a structurally singular matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Fused matrices whose equilibrated condition number exceeds this are
#: reported as singular (flagged fields) instead of huge finite bounds.
#: Conditioning is measured on the diagonally rescaled (unit-free) matrix:
#: position entries are in meters and the Doppler scale is dimensionless, so
#: the raw spectrum spans many decades for perfectly observable geometries,
#: while genuine degeneracy (collinear information) survives rescaling.
CONDITION_LIMIT = 1e12

CASES = (1, 2, 3)

_SYM_TOL = 1e-12
_PSD_TOL = 1e-9


def validate_fim(fim: np.ndarray, name: str = "fim") -> np.ndarray:
    """Check symmetry and near-positive-semidefiniteness, then return the
    exactly symmetrized matrix."""
    fim = np.asarray(fim, dtype=float)
    if fim.shape != (3, 3):
        raise ValueError(f"{name} must be 3x3, got {fim.shape}")
    if not np.all(np.isfinite(fim)):
        raise ValueError(f"{name} has non-finite entries")
    scale = max(float(np.max(np.abs(fim))), 1.0)
    if np.max(np.abs(fim - fim.T)) > _SYM_TOL * scale:
        raise ValueError(f"{name} is not symmetric")
    sym = 0.5 * (fim + fim.T)
    eigs = np.linalg.eigvalsh(sym)
    if eigs[0] < -_PSD_TOL * max(np.trace(sym), 1.0):
        raise ValueError(f"{name} is not positive semidefinite (min eig {eigs[0]:.3e})")
    return sym


def fuse(case_id: int, fim_n1: np.ndarray, fim_n2: np.ndarray,
         fim_bs: np.ndarray) -> np.ndarray:
    """Sum the information matrices that participate in the given case."""
    if case_id not in CASES:
        raise ValueError(f"case_id must be one of {CASES}, got {case_id}")
    n1 = validate_fim(fim_n1, "fim_n1")
    n2 = validate_fim(fim_n2, "fim_n2")
    bs = validate_fim(fim_bs, "fim_bs")
    if case_id == 1:
        return n1 + n2
    if case_id == 2:
        return n1 + n2 + bs
    return bs


@dataclass(frozen=True)
class CrlbResult:
    """Square-root bounds for one fused matrix.

    ``None`` fields mark unobservable or numerically singular components;
    they are emitted downstream as an explicit flag, never as a huge number.
    """

    sqrt_crlb_position: float | None
    sqrt_crlb_eta: float | None
    case_id: int
    condition_number: float

    @property
    def position_singular(self) -> bool:
        return self.sqrt_crlb_position is None

    @property
    def eta_singular(self) -> bool:
        return self.sqrt_crlb_eta is None


def _equilibrated(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Diagonally rescale to unit diagonal; None when a parameter carries no
    information at all (zero diagonal entry)."""
    diag = np.diag(matrix)
    if np.any(diag <= 0.0):
        return None
    scale = np.sqrt(diag)
    return matrix / np.outer(scale, scale), scale


def _invert_flagged(matrix: np.ndarray) -> tuple[np.ndarray | None, float]:
    """(inverse, equilibrated condition number); inverse is None when the
    matrix is singular beyond :data:`CONDITION_LIMIT`."""
    eq = _equilibrated(matrix)
    if eq is None:
        return None, np.inf
    scaled, scale = eq
    with np.errstate(all="ignore"):
        try:
            cond = float(np.linalg.cond(scaled))
        except np.linalg.LinAlgError:
            return None, np.inf
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        return None, np.inf if not np.isfinite(cond) else cond
    inv = np.linalg.inv(scaled) / np.outer(scale, scale)
    return inv, cond


def invert_fim(fim: np.ndarray) -> np.ndarray:
    """Full bound matrix (inverse of the fused information) via equilibrated
    inversion; raises on singularity instead of flagging."""
    inv, cond = _invert_flagged(validate_fim(fim))
    if inv is None:
        raise np.linalg.LinAlgError(
            f"information matrix is singular (equilibrated condition {cond:.3e})")
    return inv


def crlb(fim: np.ndarray, case_id: int) -> CrlbResult:
    """Extract sqrt bounds on position and Doppler scale from a fused matrix.

    The position bound is the root of the summed position diagonal of the
    inverse; the Doppler bound is the root of the scale diagonal entry.
    Degeneracy is handled by flagging, not by raising.
    """
    fim = validate_fim(fim)
    if case_id not in CASES:
        raise ValueError(f"case_id must be one of {CASES}, got {case_id}")

    if case_id == 1:
        inv, cond = _invert_flagged(fim[:2, :2])
        if inv is None:
            return CrlbResult(None, None, case_id, cond)
        return CrlbResult(float(np.sqrt(inv[0, 0] + inv[1, 1])), None, case_id, cond)

    inv, cond = _invert_flagged(fim)
    if inv is None:
        return CrlbResult(None, None, case_id, cond)
    return CrlbResult(float(np.sqrt(inv[0, 0] + inv[1, 1])),
                      float(np.sqrt(inv[2, 2])), case_id, cond)
