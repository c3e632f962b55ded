#pragma once

#include <iosfwd>

#include "ftsyn/model.hpp"

namespace ftsyn {

/// Semidefinite program with matrix variables, affine PSD constraints and a
/// linear objective (maximize). Variables are flattened into a scalar vector
/// theta; symmetric variables store the upper triangle.
class SdpProblem {
  public:
    struct Variable {
        std::string name;
        int rows = 0, cols = 0;
        bool symmetric = false;
        int offset = 0; // position of first scalar in theta
        int size = 0;   // number of scalars
    };

    /// Affine map theta -> constant + sum_k theta_k * coeff_k, required PSD.
    struct Constraint {
        std::string label;
        int dim = 0;
        Mat constant;
        std::vector<std::pair<int, Mat>> terms; // (global scalar index, coeff)
    };

    int add_variable(const std::string& name, int rows, int cols, bool symmetric);

    const Variable& variable(int v) const { return vars_.at(static_cast<size_t>(v)); }
    int num_variables() const { return static_cast<int>(vars_.size()); }
    int num_scalars() const { return num_scalars_; }
    int num_constraints() const { return static_cast<int>(constraints_.size()); }
    const std::vector<Constraint>& constraints() const { return constraints_; }

    /// Basis matrix of the k-th scalar of variable v (k local).
    Mat basis(int v, int k) const;

    /// Reassemble a variable's matrix value from the scalar vector.
    Mat value(int v, const Vec& theta) const;

    /// Builder for one PSD constraint. Blocks are written into the upper
    /// triangle and mirrored; diagonal blocks are symmetrized.
    class ConstraintBuilder {
      public:
        ConstraintBuilder(SdpProblem& problem, int dim, std::string label);
        void add_constant(int row, int col, const Mat& block);
        /// Adds L * (value of var v) * R at block position (row, col).
        void add_variable_block(int row, int col, int v, const Mat& L, const Mat& R);
        void finish();

      private:
        SdpProblem& problem_;
        Constraint c_;
        void accumulate(int row, int col, int scalar, const Mat& coeff);
        void accumulate_constant(int row, int col, const Mat& block);
        std::vector<Mat> coeff_; // dense per-scalar accumulation (sparse map)
        std::vector<int> touched_;
        bool finished_ = false;
    };

    /// Maximize objective^T theta.
    void set_objective(const Vec& c);
    /// Adds weight to the objective coefficient of scalar k (global index).
    void add_objective_term(int scalar, double weight);
    const Vec& objective() const { return objective_; }

    /// Scalar index of the (i,j) entry of variable v.
    int scalar_index(int v, int i, int j) const;

    void validate() const;

    /// Plain-text sparse triplet dump for offline cross-checking.
    void dump(std::ostream& os) const;

  private:
    std::vector<Variable> vars_;
    std::vector<Constraint> constraints_;
    Vec objective_;
    int num_scalars_ = 0;
    friend class ConstraintBuilder;
};

struct SdpStatus {
    enum class Kind { Optimal, Infeasible, Unbounded, NumericalFailure };
    Kind kind = Kind::NumericalFailure;
    double objective = 0.0;
    std::vector<double> residuals; // per-constraint min eigenvalue at solution
    std::string message;
};

struct SdpSolution {
    SdpStatus status;
    Vec theta;
};

/// Deterministic primal barrier interior-point solve. On Optimal, every
/// constraint holds with min_eig >= -tol and the objective is within solver
/// tolerance of the optimum.
SdpSolution solve_sdp(const SdpProblem& problem, double tol = 1e-8);

} // namespace ftsyn
