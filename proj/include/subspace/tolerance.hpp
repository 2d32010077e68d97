#pragma once

namespace subspace {

/// Central numeric tolerance record shared by all modules.
struct Tolerances {
    double abs = 1e-10;                ///< absolute comparison tolerance
    double rel = 1e-8;                 ///< relative comparison tolerance
    double rank_rel = 1e-9;            ///< sigma_i counts as nonzero when sigma_i > rank_rel * sigma_1
    double basis_orthogonality = 1e-6; ///< max |<e_i,e_j>| allowed between minterm basis vectors
    double root_residual = 1e-12;      ///< bisection stopping residual for the t* equations
    double psd = 1e-8;                 ///< eigenvalues of a Gram matrix may undershoot zero by this much
    double unit_norm = 1e-8;           ///< |norm(x) - 1| allowed for posterior queries

    /// Builds a record from the textual value of SUBSPACE_TOL: `abs` is set
    /// to the parsed value and `rel` to 100x that, keeping the default ratio.
    static Tolerances from_env_value(const char *value);
};

/// Process-wide tolerances, read once from the SUBSPACE_TOL environment
/// variable (absolute tolerance; see from_env_value). Defaults when unset.
const Tolerances &tolerances();

} // namespace subspace
