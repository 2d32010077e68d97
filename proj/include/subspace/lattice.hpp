#pragma once

#include "subspace/loss.hpp"
#include "subspace/spectral.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace subspace {

/// The distinct binary label columns of Y (the observed minterms), in
/// lexicographic order, together with the sample indices carrying each one.
struct MintermTable {
    std::vector<std::vector<std::uint8_t>> minterms; ///< distinct c-bit patterns
    std::vector<std::vector<int>> index_sets;        ///< 0-based sample indices per minterm
    Index literal_count = 0;

    Index size() const { return static_cast<Index>(minterms.size()); }
};

MintermTable extract_minterms(const LabelMatrix &y);

/// One-hot indicator matrix with one row per observed minterm: entry (i, j)
/// is 1 iff sample j carries minterm i. Always full row rank, so it is the
/// label matrix under which the closed-form minimizer realizes the
/// orthogonal-minterm geometry that balanced-batch training produces on the
/// raw labels. Disjoint-class label matrices are their own indicator.
LabelMatrix minterm_indicator(const MintermTable &table);

/// One unit vector per observed minterm. Construction validates unit norms
/// and pairwise orthogonality; embeddings away from a loss minimizer fail
/// here with NonDegenerateBlock.
class MintermBasis {
  public:
    /// `vectors` is d x m, one column per minterm.
    static MintermBasis from_columns(Matrix vectors);

    const Matrix &vectors() const { return vectors_; }
    Index dim() const { return vectors_.rows(); }
    Index size() const { return vectors_.cols(); }
    Vector vector(Index i) const { return vectors_.col(i); }

    friend bool operator==(const MintermBasis &a, const MintermBasis &b) {
        return a.vectors_.rows() == b.vectors_.rows() &&
               a.vectors_.cols() == b.vectors_.cols() && a.vectors_ == b.vectors_;
    }

  private:
    explicit MintermBasis(Matrix vectors) : vectors_(std::move(vectors)) {}
    Matrix vectors_;
};

/// Basis vector e_i = top left singular vector of the embedding block
/// X[:, J_i] for each minterm, sign-fixed by the SVD convention. A block
/// whose top singular value is not at least 10x the second is rejected
/// with NonDegenerateBlock (the embeddings are not at a minimizer).
MintermBasis minterm_basis(const Matrix &x, const MintermTable &table);

/// Formula over the c literals with NOT > AND > OR precedence, stored as a
/// flat node list.
struct PropositionAst {
    enum class Kind { Literal, Not, And, Or };
    struct Node {
        Kind kind;
        int literal = -1; ///< 0-based label index for Kind::Literal
        int lhs = -1;     ///< child (Not) or left child (And/Or)
        int rhs = -1;
    };

    std::vector<Node> nodes;
    int root = -1;
    std::string source;

    /// Truth value under a full assignment of the c literals.
    bool evaluate(const std::vector<std::uint8_t> &assignment) const;
};

/// Grammar: expr := term ('|' term)* ; term := factor ('&' factor)* ;
/// factor := '!' factor | '(' expr ')' | LABEL, with
/// LABEL = [A-Za-z_][A-Za-z0-9_]* bound case-sensitively to `labels`.
/// Throws ParseError with the offending position.
PropositionAst parse_proposition(const std::string &text,
                                 const std::vector<std::string> &labels);

/// Minterm indices (into `table`) whose truth assignment satisfies the
/// formula. Evaluation runs over observed minterms only, so an empty
/// result is legal and maps to the zero projection.
std::vector<int> to_dnf(const PropositionAst &ast, const MintermTable &table);

/// Symmetric idempotent matrix P = sum_{i in J} e_i e_i^T together with the
/// minterm subset it projects onto and the basis it was built from.
class ProjectionOperator {
  public:
    ProjectionOperator(Matrix p, std::vector<int> minterm_set, MintermBasis basis);

    const Matrix &matrix() const { return p_; }
    const std::vector<int> &minterm_set() const { return minterm_set_; }
    const MintermBasis &basis() const { return basis_; }
    Index dim() const { return p_.rows(); }

  private:
    Matrix p_;
    std::vector<int> minterm_set_; ///< sorted ascending
    MintermBasis basis_;
};

ProjectionOperator projection_operator(const std::vector<int> &minterm_set,
                                       const MintermBasis &basis);

/// <x, P x> clamped to [0,1]. x must be unit norm (NormalizationError).
double posterior(const Vector &x, const ProjectionOperator &p);

/// Same as posterior but without the clamp, for round-off inspection.
double posterior_raw(const Vector &x, const ProjectionOperator &p);

/// meet = P Q, join = P + Q - P Q, complement of p relative to the lattice
/// top (the projection onto the span of all basis vectors, which is the
/// identity whenever the observed minterms span R^d). Minterm sets follow
/// set intersection/union/complement. Throws BasisMismatch when p and q
/// come from different bases.
struct LatticeOps {
    ProjectionOperator meet;
    ProjectionOperator join;
    ProjectionOperator complement_p;
};

LatticeOps lattice_ops(const ProjectionOperator &p, const ProjectionOperator &q);

/// P x, the representation updated with the information that the
/// proposition holds; renormalized to unit length on request
/// (DegenerateUpdate when P annihilates x).
Vector update_representation(const Vector &x, const ProjectionOperator &p, bool renormalize);

} // namespace subspace
