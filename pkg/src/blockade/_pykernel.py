"""Pure-Python/scipy twin of the compiled RK4 kernel.

Same contract and same arithmetic as blockade._cykernel.rk4_csr, an order of
magnitude slower on long propagations; used when the extension is not built
and as a cross-check in tests and benchmarks.
"""

import numpy as np
import scipy.sparse as sparse


def rk4_csr(indptr, indices, data, y0, h, n_sub, n_out):
    """Propagate y' = M y with classical RK4, snapshotting every n_sub steps."""
    y = np.array(y0, dtype=np.complex128, copy=True)
    n = y.shape[0]
    if len(indptr) != n + 1:
        raise ValueError("indptr length does not match the state dimension")
    if n_sub < 1 or n_out < 0:
        raise ValueError("n_sub must be >= 1 and n_out >= 0")
    m = sparse.csr_matrix(
        (np.asarray(data, dtype=np.complex128), indices, indptr), shape=(n, n)
    )
    out = np.empty((n_out + 1, n), dtype=np.complex128)
    out[0] = y
    half_h = 0.5 * h
    sixth_h = h / 6.0
    for block in range(n_out):
        for _ in range(n_sub):
            k1 = m @ y
            k2 = m @ (y + half_h * k1)
            k3 = m @ (y + half_h * k2)
            k4 = m @ (y + h * k3)
            y = y + sixth_h * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[block + 1] = y
    return out
