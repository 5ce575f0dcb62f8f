"""liesim: exact statevector emulation of ancilla-based simulation
algorithms, cross-validated by Lie-algebraic classical engines.

Subpackages map one-to-one onto the functional blocks:

- `statevector`   dense n-qubit register and elementary gates
- `opalgebra`     Pauli sums, fermion/anyon/boson encodings
- `qprotocol`     ancilla correlation & spectrum protocols, Trotter steps
- `spectral`      discrete Fourier transform, peak refinement, error bars
- `liecore`       algebra specs, Cartan-Weyl data, matrix exponential
- `meanfield`     generalized Jacobi diagonalization
- `gcs`           coherent-state expectations and state synthesis
- `entanglement`  standard and algebra-relative entanglement measures
- `models`        Fano-Anderson, Hubbard, XY chain, LMG builders/solutions
- `cli`           batch experiment runner
"""

__version__ = "0.1.0"

__all__ = [
    "statevector",
    "opalgebra",
    "qprotocol",
    "spectral",
    "liecore",
    "meanfield",
    "gcs",
    "entanglement",
    "models",
    "cli",
]
