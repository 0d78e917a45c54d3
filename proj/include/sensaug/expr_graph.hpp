/*
 Copyright 2026 The sensaug Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef SENSAUG_EXPR_GRAPH_HPP
#define SENSAUG_EXPR_GRAPH_HPP

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace sensaug {

enum class OpKind : std::uint8_t {
  Constant,
  Var,  // aux = block (0 = w, 1 = p), bux = index within block
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Sin,
  Cos,
  Exp,
  Sqrt,
  Pow,  // constant exponent stored in payload
};

enum class VarBlock : std::uint8_t { w = 0, p = 1 };

struct EvalDomainError : std::runtime_error {
  int node;
  EvalDomainError(const std::string& what, int node_id)
      : std::runtime_error(what + " (node " + std::to_string(node_id) + ")"), node(node_id) {}
};

/// Hash-consed DAG of scalar expressions over two input blocks (w, p).
/// Children always precede parents, so node order is a topological order.
/// Immutable once the owning problem finishes construction; evaluation is
/// pure and allocates its own scratch, safe for concurrent use.
class ExprGraph {
 public:
  struct Node {
    OpKind kind;
    std::int32_t a = -1;
    std::int32_t b = -1;
    double payload = 0.0;  // Constant value, Pow exponent, Var block in a/bux in b
  };

  ExprGraph(int n_w, int n_p);

  int num_w() const { return n_w_; }
  int num_p() const { return n_p_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  // Builders. All apply constant folding and algebraic identities
  // (x+0, x*1, x*0, pow(x,1), ...) so derivatives of independent
  // subexpressions collapse to the shared zero node.
  int constant(double v);
  int var(VarBlock block, int index);
  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);
  int div(int a, int b);
  int neg(int a);
  int sin_(int a);
  int cos_(int a);
  int exp_(int a);
  int sqrt_(int a);
  int pow_(int a, double exponent);

  bool is_constant(int id, double v) const;

  /// Symbolic derivative of node `id` with respect to the given input,
  /// memoized across calls. Appends nodes as needed.
  int derivative(int id, VarBlock block, int index);

  void set_outputs(std::vector<int> roots) { outputs_ = std::move(roots); }
  const std::vector<int>& outputs() const { return outputs_; }
  int num_outputs() const { return static_cast<int>(outputs_.size()); }

  /// Evaluates the given roots at (w, p). Pure; results are bit-identical
  /// for identical inputs.
  void eval_roots(const std::vector<int>& roots, const Eigen::VectorXd& w,
                  const Eigen::VectorXd& p, double* out) const;

  Eigen::VectorXd evaluate(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const;

 private:
  int intern(Node n);
  void check_dims(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const;

  int n_w_;
  int n_p_;
  std::vector<Node> nodes_;
  std::vector<int> outputs_;
  std::unordered_map<std::uint64_t, std::vector<int>> cse_;
  std::unordered_map<std::uint64_t, int> deriv_memo_;
};

/// Sparse collection of scalar roots laid out into a dense (rows x cols)
/// matrix. Entries that folded to the constant zero are not stored.
class MatrixEvaluator {
 public:
  struct Entry {
    std::int32_t root;
    std::int32_t row;
    std::int32_t col;
  };

  MatrixEvaluator() = default;
  MatrixEvaluator(const ExprGraph* graph, int rows, int cols, std::vector<Entry> entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Eigen::MatrixXd eval(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const;

 private:
  const ExprGraph* graph_ = nullptr;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Entry> entries_;
  std::vector<std::int32_t> sched_;
  std::vector<std::int32_t> slot_;
};

/// Jacobian of the graph's outputs with respect to one input block.
MatrixEvaluator make_jacobian(ExprGraph& graph, VarBlock block);

/// Vector evaluator for the graph's declared outputs.
MatrixEvaluator make_value_evaluator(const ExprGraph& graph);

/// Weighted sum of per-output second-derivative blocks:
/// eval(w, p, weights) = sum_o weights[o] * d2 output_o / d(block_r) d(block_c).
/// For (w, w) the result is symmetric by construction (upper triangle
/// differentiated once and mirrored).
class WeightedHessianEvaluator {
 public:
  WeightedHessianEvaluator() = default;
  WeightedHessianEvaluator(ExprGraph& graph, VarBlock row_block, VarBlock col_block);

  Eigen::MatrixXd eval(const Eigen::VectorXd& w, const Eigen::VectorXd& p,
                       const Eigen::VectorXd& weights) const;

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  struct Entry {
    std::int32_t root;
    std::int32_t output;
    std::int32_t row;
    std::int32_t col;
  };
  const ExprGraph* graph_ = nullptr;
  bool symmetric_ = false;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Entry> entries_;
  std::vector<std::int32_t> sched_;
  std::vector<std::int32_t> slot_;
};

/// Thin handle for building expressions with natural syntax.
struct Expr {
  ExprGraph* g = nullptr;
  int id = -1;
};

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator+(Expr a, double b);
Expr operator+(double a, Expr b);
Expr operator-(Expr a, double b);
Expr operator-(double a, Expr b);
Expr operator*(Expr a, double b);
Expr operator*(double a, Expr b);
Expr operator/(Expr a, double b);
Expr operator/(double a, Expr b);
Expr sin(Expr a);
Expr cos(Expr a);
Expr exp(Expr a);
Expr sqrt(Expr a);
Expr pow(Expr a, double e);
Expr square(Expr a);

}  // namespace sensaug

#endif  // SENSAUG_EXPR_GRAPH_HPP
