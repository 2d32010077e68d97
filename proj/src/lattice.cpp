#include "subspace/lattice.hpp"

#include "subspace/errors.hpp"
#include "subspace/tolerance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace subspace {

MintermTable extract_minterms(const LabelMatrix &y) {
    std::map<std::vector<std::uint8_t>, std::vector<int>> groups;
    for (Index j = 0; j < y.sample_count(); ++j) {
        std::vector<std::uint8_t> pattern(static_cast<std::size_t>(y.label_count()));
        for (Index i = 0; i < y.label_count(); ++i) {
            pattern[static_cast<std::size_t>(i)] = y.matrix()(i, j) > 0.5 ? 1 : 0;
        }
        groups[pattern].push_back(static_cast<int>(j));
    }
    MintermTable table;
    table.literal_count = y.label_count();
    for (auto &[pattern, indices] : groups) { // std::map iterates lexicographically
        table.minterms.push_back(pattern);
        table.index_sets.push_back(std::move(indices));
    }
    return table;
}

LabelMatrix minterm_indicator(const MintermTable &table) {
    if (table.size() == 0) {
        throw InvalidMatrix("minterm_indicator: empty minterm table");
    }
    Index n = 0;
    for (const auto &set : table.index_sets) {
        n += static_cast<Index>(set.size());
    }
    Matrix ind = Matrix::Zero(table.size(), n);
    for (Index i = 0; i < table.size(); ++i) {
        for (int j : table.index_sets[static_cast<std::size_t>(i)]) {
            ind(i, j) = 1.0;
        }
    }
    return LabelMatrix(std::move(ind));
}

MintermBasis MintermBasis::from_columns(Matrix vectors) {
    if (vectors.rows() < 1 || vectors.cols() < 1) {
        throw InvalidMatrix("MintermBasis: empty vector set");
    }
    if (vectors.cols() > vectors.rows()) {
        throw DimensionError("MintermBasis: more vectors than ambient dimensions");
    }
    const auto &tol = tolerances();
    for (Index i = 0; i < vectors.cols(); ++i) {
        if (std::abs(vectors.col(i).norm() - 1.0) > 1e-10) {
            throw NonDegenerateBlock("MintermBasis: vector " + std::to_string(i) +
                                     " is not unit norm");
        }
        for (Index j = i + 1; j < vectors.cols(); ++j) {
            const double dot = std::abs(vectors.col(i).dot(vectors.col(j)));
            if (dot > tol.basis_orthogonality) {
                throw NonDegenerateBlock(
                    "MintermBasis: vectors " + std::to_string(i) + " and " + std::to_string(j) +
                    " are not orthogonal (|<e_i,e_j>| = " + std::to_string(dot) +
                    "); embeddings are not at a loss minimizer");
            }
        }
    }
    return MintermBasis(std::move(vectors));
}

MintermBasis minterm_basis(const Matrix &x, const MintermTable &table) {
    if (table.size() == 0) {
        throw InvalidMatrix("minterm_basis: empty minterm table");
    }
    Matrix vectors(x.rows(), table.size());
    for (Index i = 0; i < table.size(); ++i) {
        const auto &indices = table.index_sets[static_cast<std::size_t>(i)];
        Matrix block(x.rows(), static_cast<Index>(indices.size()));
        for (std::size_t k = 0; k < indices.size(); ++k) {
            block.col(static_cast<Index>(k)) = x.col(indices[k]);
        }
        const SvdFactors f = svd(block);
        const double top = f.singular_values(0);
        const double second = f.singular_values.size() > 1 ? f.singular_values(1) : 0.0;
        if (!(top > 0.0) || top < 10.0 * second) {
            throw NonDegenerateBlock(
                "minterm block " + std::to_string(i) + " is not numerically rank-1 (sigma1 = " +
                std::to_string(top) + ", sigma2 = " + std::to_string(second) +
                "); embeddings are not at a loss minimizer");
        }
        vectors.col(i) = f.left.col(0);
    }
    return MintermBasis::from_columns(std::move(vectors));
}

bool PropositionAst::evaluate(const std::vector<std::uint8_t> &assignment) const {
    if (root < 0) {
        throw Error("PropositionAst: empty formula");
    }
    // Recursive evaluation over the flat node list.
    auto eval = [&](auto &&self, int idx) -> bool {
        const Node &node = nodes[static_cast<std::size_t>(idx)];
        switch (node.kind) {
        case Kind::Literal:
            return assignment[static_cast<std::size_t>(node.literal)] != 0;
        case Kind::Not:
            return !self(self, node.lhs);
        case Kind::And:
            return self(self, node.lhs) && self(self, node.rhs);
        case Kind::Or:
            return self(self, node.lhs) || self(self, node.rhs);
        }
        throw Error("PropositionAst: corrupt node");
    };
    return eval(eval, root);
}

namespace {

class Parser {
  public:
    Parser(const std::string &text, const std::vector<std::string> &labels)
        : text_(text), labels_(labels) {}

    PropositionAst parse() {
        PropositionAst ast;
        ast.source = text_;
        ast.root = parse_expr(ast);
        skip_ws();
        if (pos_ < text_.size()) {
            throw ParseError("unexpected trailing input '" + text_.substr(pos_) + "'", pos_);
        }
        return ast;
    }

  private:
    int parse_expr(PropositionAst &ast) {
        int node = parse_term(ast);
        while (peek() == '|') {
            ++pos_;
            const int rhs = parse_term(ast);
            node = add(ast, {PropositionAst::Kind::Or, -1, node, rhs});
        }
        return node;
    }

    int parse_term(PropositionAst &ast) {
        int node = parse_factor(ast);
        while (peek() == '&') {
            ++pos_;
            const int rhs = parse_factor(ast);
            node = add(ast, {PropositionAst::Kind::And, -1, node, rhs});
        }
        return node;
    }

    int parse_factor(PropositionAst &ast) {
        const char c = peek();
        if (c == '!') {
            ++pos_;
            const int child = parse_factor(ast);
            return add(ast, {PropositionAst::Kind::Not, -1, child, -1});
        }
        if (c == '(') {
            ++pos_;
            const int node = parse_expr(ast);
            if (peek() != ')') {
                throw ParseError("expected ')'", pos_);
            }
            ++pos_;
            return node;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name = text_.substr(start, pos_ - start);
            for (std::size_t i = 0; i < labels_.size(); ++i) {
                if (labels_[i] == name) {
                    return add(ast,
                               {PropositionAst::Kind::Literal, static_cast<int>(i), -1, -1});
                }
            }
            throw ParseError("unknown label '" + name + "'", start);
        }
        if (c == '\0') {
            throw ParseError("unexpected end of input", pos_);
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    int add(PropositionAst &ast, PropositionAst::Node node) {
        ast.nodes.push_back(node);
        return static_cast<int>(ast.nodes.size()) - 1;
    }

    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    const std::string &text_;
    const std::vector<std::string> &labels_;
    std::size_t pos_ = 0;
};

} // namespace

PropositionAst parse_proposition(const std::string &text,
                                 const std::vector<std::string> &labels) {
    return Parser(text, labels).parse();
}

std::vector<int> to_dnf(const PropositionAst &ast, const MintermTable &table) {
    std::vector<int> j;
    for (Index i = 0; i < table.size(); ++i) {
        if (ast.evaluate(table.minterms[static_cast<std::size_t>(i)])) {
            j.push_back(static_cast<int>(i));
        }
    }
    return j;
}

ProjectionOperator::ProjectionOperator(Matrix p, std::vector<int> minterm_set,
                                       MintermBasis basis)
    : p_(std::move(p)), minterm_set_(std::move(minterm_set)), basis_(std::move(basis)) {
    std::sort(minterm_set_.begin(), minterm_set_.end());
    const double asym = (p_ - p_.transpose()).cwiseAbs().maxCoeff();
    if (asym > tolerances().abs) {
        throw InvalidMatrix("ProjectionOperator: matrix not symmetric (deviation " +
                            std::to_string(asym) + ")");
    }
    for (int i : minterm_set_) {
        if (i < 0 || i >= basis_.size()) {
            throw DimensionError("ProjectionOperator: minterm index " + std::to_string(i) +
                                 " outside the basis");
        }
    }
}

ProjectionOperator projection_operator(const std::vector<int> &minterm_set,
                                       const MintermBasis &basis) {
    std::vector<int> unique_set = minterm_set;
    std::sort(unique_set.begin(), unique_set.end());
    unique_set.erase(std::unique(unique_set.begin(), unique_set.end()), unique_set.end());

    Matrix p = Matrix::Zero(basis.dim(), basis.dim());
    for (int i : unique_set) {
        if (i < 0 || i >= basis.size()) {
            throw DimensionError("projection_operator: minterm index " + std::to_string(i) +
                                 " outside the basis");
        }
        const Vector e = basis.vector(i);
        p.noalias() += e * e.transpose();
    }
    return ProjectionOperator(std::move(p), std::move(unique_set), basis);
}

double posterior_raw(const Vector &x, const ProjectionOperator &p) {
    if (x.size() != p.dim()) {
        throw DimensionError("posterior: vector dimension " + std::to_string(x.size()) +
                             " does not match operator dimension " + std::to_string(p.dim()));
    }
    if (std::abs(x.norm() - 1.0) > tolerances().unit_norm) {
        throw NormalizationError("posterior: representation must be unit norm, got " +
                                 std::to_string(x.norm()));
    }
    return x.dot(p.matrix() * x);
}

double posterior(const Vector &x, const ProjectionOperator &p) {
    return std::clamp(posterior_raw(x, p), 0.0, 1.0);
}

LatticeOps lattice_ops(const ProjectionOperator &p, const ProjectionOperator &q) {
    if (!(p.basis() == q.basis())) {
        throw BasisMismatch("lattice_ops: operators come from different minterm bases");
    }
    // P Q = Q P for projections sharing an eigenbasis; the symmetrized
    // product only removes round-off.
    const Matrix raw = p.matrix() * q.matrix();
    const Matrix pq = 0.5 * (raw + raw.transpose());

    std::vector<int> meet_set;
    std::set_intersection(p.minterm_set().begin(), p.minterm_set().end(),
                          q.minterm_set().begin(), q.minterm_set().end(),
                          std::back_inserter(meet_set));
    std::vector<int> join_set;
    std::set_union(p.minterm_set().begin(), p.minterm_set().end(), q.minterm_set().begin(),
                   q.minterm_set().end(), std::back_inserter(join_set));

    std::vector<int> complement_set;
    std::set<int> in_p(p.minterm_set().begin(), p.minterm_set().end());
    Matrix top = Matrix::Zero(p.dim(), p.dim());
    for (int i = 0; i < p.basis().size(); ++i) {
        const Vector e = p.basis().vector(i);
        top.noalias() += e * e.transpose();
        if (in_p.find(i) == in_p.end()) {
            complement_set.push_back(i);
        }
    }

    return LatticeOps{
        ProjectionOperator(pq, std::move(meet_set), p.basis()),
        ProjectionOperator(p.matrix() + q.matrix() - pq, std::move(join_set), p.basis()),
        ProjectionOperator(top - p.matrix(), std::move(complement_set), p.basis()),
    };
}

Vector update_representation(const Vector &x, const ProjectionOperator &p, bool renormalize) {
    if (x.size() != p.dim()) {
        throw DimensionError("update_representation: dimension mismatch");
    }
    Vector projected = p.matrix() * x;
    if (renormalize) {
        const double norm = projected.norm();
        if (norm < 1e-12) {
            throw DegenerateUpdate(
                "update_representation: projection annihilates the representation");
        }
        projected /= norm;
    }
    return projected;
}

} // namespace subspace
