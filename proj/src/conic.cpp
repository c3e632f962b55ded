#include "ftsyn/conic.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace ftsyn {

int SdpProblem::add_variable(const std::string& name, int rows, int cols, bool symmetric) {
    if (rows < 1 || cols < 1) throw ContractError("sdp variable must have positive dimensions");
    if (symmetric && rows != cols) throw ContractError("symmetric sdp variable must be square");
    Variable v;
    v.name = name;
    v.rows = rows;
    v.cols = cols;
    v.symmetric = symmetric;
    v.offset = num_scalars_;
    v.size = symmetric ? rows * (rows + 1) / 2 : rows * cols;
    num_scalars_ += v.size;
    vars_.push_back(v);
    objective_ = Vec::Zero(num_scalars_);
    return static_cast<int>(vars_.size()) - 1;
}

int SdpProblem::scalar_index(int v, int i, int j) const {
    const Variable& var = vars_.at(static_cast<size_t>(v));
    if (i < 0 || i >= var.rows || j < 0 || j >= var.cols)
        throw ContractError("scalar_index out of range");
    if (!var.symmetric) return var.offset + i * var.cols + j;
    if (i > j) std::swap(i, j);
    // upper-triangle, row-major: (i,j) with i<=j
    const int skipped = i * var.rows - i * (i - 1) / 2;
    return var.offset + skipped + (j - i);
}

Mat SdpProblem::basis(int v, int k) const {
    const Variable& var = vars_.at(static_cast<size_t>(v));
    Mat B = Mat::Zero(var.rows, var.cols);
    if (!var.symmetric) {
        B(k / var.cols, k % var.cols) = 1.0;
        return B;
    }
    // invert the upper-triangle enumeration
    int i = 0, rem = k;
    while (rem >= var.rows - i) {
        rem -= var.rows - i;
        ++i;
    }
    const int j = i + rem;
    B(i, j) = 1.0;
    B(j, i) = 1.0;
    return B;
}

Mat SdpProblem::value(int v, const Vec& theta) const {
    const Variable& var = vars_.at(static_cast<size_t>(v));
    Mat M = Mat::Zero(var.rows, var.cols);
    for (int i = 0; i < var.rows; ++i)
        for (int j = 0; j < var.cols; ++j) {
            if (var.symmetric && i > j) {
                M(i, j) = M(j, i);
                continue;
            }
            M(i, j) = theta(scalar_index(v, i, j));
        }
    if (var.symmetric)
        for (int i = 0; i < var.rows; ++i)
            for (int j = 0; j < i; ++j) M(i, j) = M(j, i);
    return M;
}

SdpProblem::ConstraintBuilder::ConstraintBuilder(SdpProblem& problem, int dim, std::string label)
    : problem_(problem) {
    c_.dim = dim;
    c_.label = std::move(label);
    c_.constant = Mat::Zero(dim, dim);
    coeff_.resize(static_cast<size_t>(problem.num_scalars()));
}

void SdpProblem::ConstraintBuilder::accumulate_constant(int row, int col, const Mat& block) {
    if (row + block.rows() > c_.dim || col + block.cols() > c_.dim)
        throw AssemblyError("constraint block out of range in '" + c_.label + "'");
    c_.constant.block(row, col, block.rows(), block.cols()) += block;
    if (row != col)
        c_.constant.block(col, row, block.cols(), block.rows()) += block.transpose();
}

void SdpProblem::ConstraintBuilder::accumulate(int row, int col, int scalar, const Mat& coeff) {
    Mat& acc = coeff_[static_cast<size_t>(scalar)];
    if (acc.size() == 0) {
        acc = Mat::Zero(c_.dim, c_.dim);
        touched_.push_back(scalar);
    }
    acc.block(row, col, coeff.rows(), coeff.cols()) += coeff;
    if (row != col)
        acc.block(col, row, coeff.cols(), coeff.rows()) += coeff.transpose();
    else
        acc.block(row, col, coeff.rows(), coeff.cols()) =
            0.5 * (acc.block(row, col, coeff.rows(), coeff.cols()) +
                   acc.block(row, col, coeff.rows(), coeff.cols()).transpose().eval());
}

void SdpProblem::ConstraintBuilder::add_constant(int row, int col, const Mat& block) {
    accumulate_constant(row, col, block);
    if (row == col)
        c_.constant.block(row, col, block.rows(), block.cols()) =
            0.5 * (c_.constant.block(row, col, block.rows(), block.cols()) +
                   c_.constant.block(row, col, block.rows(), block.cols()).transpose().eval());
}

void SdpProblem::ConstraintBuilder::add_variable_block(int row, int col, int v,
                                                       const Mat& L, const Mat& R) {
    const Variable& var = problem_.variable(v);
    if (L.cols() != var.rows || R.rows() != var.cols)
        throw AssemblyError("variable block dimension mismatch in '" + c_.label + "'");
    for (int k = 0; k < var.size; ++k) {
        Mat coeff = L * problem_.basis(v, k) * R;
        accumulate(row, col, var.offset + k, coeff);
    }
}

void SdpProblem::ConstraintBuilder::finish() {
    if (finished_) throw ContractError("constraint already finished");
    finished_ = true;
    for (int scalar : touched_)
        c_.terms.emplace_back(scalar, coeff_[static_cast<size_t>(scalar)]);
    problem_.constraints_.push_back(std::move(c_));
}

void SdpProblem::set_objective(const Vec& c) {
    if (c.size() != num_scalars_) throw ContractError("objective size mismatch");
    objective_ = c;
}

void SdpProblem::add_objective_term(int scalar, double weight) {
    objective_(scalar) += weight;
}

void SdpProblem::validate() const {
    if (constraints_.empty()) throw ContractError("sdp has no constraints");
    if (objective_.size() != num_scalars_ || objective_.cwiseAbs().maxCoeff() == 0.0)
        throw ContractError("sdp objective is empty");
    for (const Constraint& c : constraints_) {
        const double scale = std::max(1.0, c.constant.cwiseAbs().maxCoeff());
        if ((c.constant - c.constant.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw AssemblyError("asymmetric constant in constraint '" + c.label + "'");
        for (const auto& [k, A] : c.terms) {
            if (A.rows() != c.dim || A.cols() != c.dim)
                throw AssemblyError("coefficient dimension mismatch in '" + c.label + "'");
            const double s = std::max(1.0, A.cwiseAbs().maxCoeff());
            if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * s)
                throw AssemblyError("asymmetric coefficient in constraint '" + c.label + "'");
            if (k < 0 || k >= num_scalars_)
                throw AssemblyError("scalar index out of range in '" + c.label + "'");
        }
    }
}

void SdpProblem::dump(std::ostream& os) const {
    os << "# sdp sparse triplet dump (maximize)\n";
    os << "scalars " << num_scalars_ << "\n";
    for (int v = 0; v < num_variables(); ++v) {
        const Variable& var = vars_[static_cast<size_t>(v)];
        os << "var " << v << " " << var.name << " " << var.rows << " " << var.cols << " "
           << (var.symmetric ? "sym" : "rect") << " offset " << var.offset << "\n";
    }
    for (int k = 0; k < num_scalars_; ++k)
        if (objective_(k) != 0.0) os << "obj " << k << " " << objective_(k) << "\n";
    for (size_t ci = 0; ci < constraints_.size(); ++ci) {
        const Constraint& c = constraints_[ci];
        os << "constraint " << ci << " dim " << c.dim << " label " << c.label << "\n";
        for (int r = 0; r < c.dim; ++r)
            for (int col = 0; col < c.dim; ++col)
                if (c.constant(r, col) != 0.0)
                    os << "  const " << r << " " << col << " " << c.constant(r, col) << "\n";
        for (const auto& [k, A] : c.terms)
            for (int r = 0; r < c.dim; ++r)
                for (int col = 0; col < c.dim; ++col)
                    if (A(r, col) != 0.0)
                        os << "  term " << k << " " << r << " " << col << " " << A(r, col) << "\n";
    }
}

// ---------------------------------------------------------------------------
// Barrier interior-point solver
// ---------------------------------------------------------------------------

namespace {

struct Block {
    int dim = 0;
    Mat constant;
    std::vector<std::pair<int, Mat>> terms;
};

struct PathOptions {
    double tol = 1e-8;
    double unbounded_threshold = 1e11;
    int max_newton_per_stage = 120;
    double t0 = 1.0;
    double mu = 10.0;
    // early exit: stop as soon as predicate(theta) is true
    std::function<bool(const Vec&)> early_exit;
};

enum class PathKind { Converged, EarlyExit, Unbounded, NumericalFailure };

struct PathResult {
    PathKind kind = PathKind::NumericalFailure;
    Vec theta;
    double gap = std::numeric_limits<double>::infinity();
    std::string message;
};

bool assemble(const std::vector<Block>& blocks, const Vec& theta, std::vector<Mat>& G) {
    G.resize(blocks.size());
    for (size_t b = 0; b < blocks.size(); ++b) {
        G[b] = blocks[b].constant;
        for (const auto& [k, A] : blocks[b].terms) G[b] += theta(k) * A;
    }
    return true;
}

// returns false if any block fails Cholesky (not strictly PD)
bool factorize(const std::vector<Block>& blocks, const Vec& theta,
               std::vector<Eigen::LLT<Mat>>& llts, double* logdet = nullptr) {
    std::vector<Mat> G;
    assemble(blocks, theta, G);
    llts.resize(blocks.size());
    double ld = 0.0;
    for (size_t b = 0; b < blocks.size(); ++b) {
        llts[b].compute(G[b]);
        if (llts[b].info() != Eigen::Success) return false;
        const auto& Lm = llts[b].matrixLLT();
        for (int i = 0; i < G[b].rows(); ++i) {
            const double d = Lm(i, i);
            if (!(d > 0.0) || !std::isfinite(d)) return false;
            ld += 2.0 * std::log(d);
        }
    }
    if (logdet) *logdet = ld;
    return true;
}

// minimize phi(theta) = -t c.theta - sum logdet(G_b)
PathResult follow_path(const std::vector<Block>& blocks, const Vec& c, const Vec& theta0,
                       const PathOptions& opt) {
    const int m = static_cast<int>(c.size());
    int dims_total = 0;
    for (const Block& b : blocks) dims_total += b.dim;

    PathResult res;
    res.theta = theta0;

    std::vector<Eigen::LLT<Mat>> llts;
    double logdet = 0.0;
    if (!factorize(blocks, res.theta, llts, &logdet)) {
        res.message = "initial point not strictly feasible";
        return res;
    }
    if (opt.early_exit && opt.early_exit(res.theta)) {
        res.kind = PathKind::EarlyExit;
        return res;
    }

    const double obj0 = std::abs(c.dot(theta0));
    double t = opt.t0;
    for (int stage = 0; stage < 64; ++stage) {
        // Newton centering at this t
        for (int it = 0; it < opt.max_newton_per_stage; ++it) {
            Vec grad = -t * c;
            Mat H = Mat::Zero(m, m);
            for (size_t b = 0; b < blocks.size(); ++b) {
                const Block& blk = blocks[b];
                const Mat S = llts[b].solve(Mat::Identity(blk.dim, blk.dim));
                std::vector<Mat> V(blk.terms.size());
                for (size_t k = 0; k < blk.terms.size(); ++k) {
                    V[k] = S * blk.terms[k].second;
                    grad(blk.terms[k].first) -= V[k].trace();
                }
                for (size_t k = 0; k < blk.terms.size(); ++k)
                    for (size_t l = k; l < blk.terms.size(); ++l) {
                        const double h = V[k].cwiseProduct(V[l].transpose()).sum();
                        const int gk = blk.terms[k].first;
                        const int gl = blk.terms[l].first;
                        H(gk, gl) += h;
                        if (gk != gl) H(gl, gk) += h;
                    }
            }
            Eigen::LDLT<Mat> ldlt(H);
            Vec d = ldlt.solve(-grad);
            if (ldlt.info() != Eigen::Success || !d.allFinite()) {
                H.diagonal().array() += 1e-10 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
                ldlt.compute(H);
                d = ldlt.solve(-grad);
                if (!d.allFinite()) {
                    res.message = "newton system solve failed";
                    return res;
                }
            }
            const double lambda_sq = -grad.dot(d);
            if (lambda_sq <= 2e-10) break;

            // backtracking line search keeping strict feasibility
            const double phi0 = -t * c.dot(res.theta) - logdet;
            double alpha = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 70; ++ls) {
                Vec cand = res.theta + alpha * d;
                std::vector<Eigen::LLT<Mat>> cand_llts;
                double cand_logdet = 0.0;
                if (factorize(blocks, cand, cand_llts, &cand_logdet)) {
                    const double phi = -t * c.dot(cand) - cand_logdet;
                    if (phi <= phi0 + 0.25 * alpha * grad.dot(d)) {
                        res.theta = cand;
                        llts = std::move(cand_llts);
                        logdet = cand_logdet;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if (!accepted) break; // stalled; accept current center

            if (std::abs(c.dot(res.theta)) > opt.unbounded_threshold * (1.0 + obj0) ||
                res.theta.cwiseAbs().maxCoeff() > 1e13) {
                res.kind = PathKind::Unbounded;
                return res;
            }
            if (opt.early_exit && opt.early_exit(res.theta)) {
                res.kind = PathKind::EarlyExit;
                return res;
            }
        }

        res.gap = static_cast<double>(dims_total) / t;
        const double obj_scale = std::max(1.0, std::abs(c.dot(res.theta)));
        if (res.gap <= opt.tol * obj_scale) {
            res.kind = PathKind::Converged;
            return res;
        }
        t *= opt.mu;
    }
    res.kind = PathKind::Converged; // t is astronomically large by now
    return res;
}

std::vector<Block> build_blocks(const SdpProblem& problem) {
    std::vector<Block> blocks;
    blocks.reserve(static_cast<size_t>(problem.num_constraints()));
    for (const auto& c : problem.constraints()) {
        Block b;
        b.dim = c.dim;
        b.constant = 0.5 * (c.constant + c.constant.transpose());
        for (const auto& [k, A] : c.terms) b.terms.emplace_back(k, 0.5 * (A + A.transpose()));
        blocks.push_back(std::move(b));
    }
    return blocks;
}

} // namespace

SdpSolution solve_sdp(const SdpProblem& problem, double tol) {
    if (!(tol > 0)) throw ContractError("solve_sdp: tol must be positive");
    problem.validate();
    const int m = problem.num_scalars();
    std::vector<Block> blocks = build_blocks(problem);

    SdpSolution out;
    out.theta = Vec::Zero(m);

    // ---- Phase 1: maximize slack s subject to G_b(theta) - s I >= 0 ----
    double min_c_eig = std::numeric_limits<double>::infinity();
    double c_scale = 1.0;
    for (const Block& b : blocks) {
        Eigen::SelfAdjointEigenSolver<Mat> es(b.constant, Eigen::EigenvaluesOnly);
        min_c_eig = std::min(min_c_eig, es.eigenvalues()(0));
        c_scale = std::max(c_scale, b.constant.cwiseAbs().maxCoeff());
    }
    const double s0 = min_c_eig - 1.0;
    const double s_cap = std::max(1.0, 2.0 * std::abs(s0));
    const double feas_margin = std::min(0.25 * s_cap, std::max(1e-8, 1e-4 * c_scale));

    std::vector<Block> aug = blocks;
    for (Block& b : aug)
        b.terms.emplace_back(m, Mat(-Mat::Identity(b.dim, b.dim)));
    Block cap;
    cap.dim = 1;
    cap.constant = Mat::Constant(1, 1, s_cap);
    cap.terms.emplace_back(m, Mat::Constant(1, 1, -1.0));
    aug.push_back(cap);

    Vec theta1 = Vec::Zero(m + 1);
    theta1(m) = s0;
    Vec c1 = Vec::Zero(m + 1);
    c1(m) = 1.0;
    PathOptions opt1;
    opt1.tol = std::min(tol, 1e-9);
    opt1.early_exit = [&](const Vec& th) { return th(m) >= feas_margin; };
    PathResult ph1 = follow_path(aug, c1, theta1, opt1);

    Vec theta = Vec::Zero(m);
    if (ph1.kind == PathKind::EarlyExit) {
        theta = ph1.theta.head(m);
    } else if (ph1.kind == PathKind::Converged) {
        const double s_star = ph1.theta(m);
        if (s_star > 0.0) {
            theta = ph1.theta.head(m);
        } else if (s_star + ph1.gap < 0.0) {
            out.status.kind = SdpStatus::Kind::Infeasible;
            out.status.message = "phase-1 slack optimum " + std::to_string(s_star);
            return out;
        } else {
            out.status.kind = SdpStatus::Kind::NumericalFailure;
            out.status.message = "phase-1 could not separate feasibility (slack " +
                                 std::to_string(s_star) + ", gap " + std::to_string(ph1.gap) + ")";
            return out;
        }
    } else {
        out.status.kind = SdpStatus::Kind::NumericalFailure;
        out.status.message = "phase-1 failed: " + ph1.message;
        return out;
    }

    // ---- Phase 2: maximize the objective from the interior point ----
    PathOptions opt2;
    opt2.tol = tol;
    PathResult ph2 = follow_path(blocks, problem.objective(), theta, opt2);
    if (ph2.kind == PathKind::Unbounded) {
        out.status.kind = SdpStatus::Kind::Unbounded;
        out.status.message = "objective diverged along the central path";
        return out;
    }
    if (ph2.kind != PathKind::Converged) {
        out.status.kind = SdpStatus::Kind::NumericalFailure;
        out.status.message = "phase-2 failed: " + ph2.message;
        return out;
    }

    out.theta = ph2.theta;
    out.status.kind = SdpStatus::Kind::Optimal;
    out.status.objective = problem.objective().dot(ph2.theta);
    out.status.residuals.clear();
    std::vector<Mat> G;
    assemble(blocks, ph2.theta, G);
    for (const Mat& Gb : G) {
        Eigen::SelfAdjointEigenSolver<Mat> es(Gb, Eigen::EigenvaluesOnly);
        out.status.residuals.push_back(es.eigenvalues()(0));
    }
    return out;
}

} // namespace ftsyn
