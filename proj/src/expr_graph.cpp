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

#include "sensaug/expr_graph.hpp"

#include <bit>
#include <cmath>

namespace sensaug {

namespace {

std::uint64_t hash_node(const ExprGraph::Node& n) {
  std::uint64_t h = static_cast<std::uint64_t>(n.kind);
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(n.a)));
  mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(n.b)));
  mix(std::bit_cast<std::uint64_t>(n.payload));
  return h;
}

bool same_node(const ExprGraph::Node& x, const ExprGraph::Node& y) {
  return x.kind == y.kind && x.a == y.a && x.b == y.b &&
         std::bit_cast<std::uint64_t>(x.payload) == std::bit_cast<std::uint64_t>(y.payload);
}

// Reachable nodes of `roots`, ascending, plus node -> slot lookup.
void build_schedule(const ExprGraph& g, const std::vector<int>& roots,
                    std::vector<std::int32_t>& sched, std::vector<std::int32_t>& slot) {
  std::vector<char> mark(static_cast<std::size_t>(g.size()), 0);
  std::vector<int> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    if (mark[static_cast<std::size_t>(id)]) continue;
    mark[static_cast<std::size_t>(id)] = 1;
    const auto& n = g.node(id);
    if (n.kind != OpKind::Constant && n.kind != OpKind::Var) {
      if (n.a >= 0) stack.push_back(n.a);
      if (n.b >= 0) stack.push_back(n.b);
    }
  }
  sched.clear();
  slot.assign(static_cast<std::size_t>(g.size()), -1);
  for (int id = 0; id < g.size(); ++id) {
    if (mark[static_cast<std::size_t>(id)]) {
      slot[static_cast<std::size_t>(id)] = static_cast<std::int32_t>(sched.size());
      sched.push_back(id);
    }
  }
}

void eval_schedule(const ExprGraph& g, const std::vector<std::int32_t>& sched,
                   const std::vector<std::int32_t>& slot, const Eigen::VectorXd& w,
                   const Eigen::VectorXd& p, std::vector<double>& vals) {
  vals.resize(sched.size());
  for (std::size_t k = 0; k < sched.size(); ++k) {
    const int id = sched[k];
    const auto& n = g.node(id);
    double v = 0.0;
    switch (n.kind) {
      case OpKind::Constant:
        v = n.payload;
        break;
      case OpKind::Var:
        v = (n.a == 0) ? w[n.b] : p[n.b];
        break;
      case OpKind::Add:
        v = vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.a)])] +
            vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.b)])];
        break;
      case OpKind::Sub:
        v = vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.a)])] -
            vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.b)])];
        break;
      case OpKind::Mul:
        v = vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.a)])] *
            vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.b)])];
        break;
      case OpKind::Div: {
        const double den = vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.b)])];
        if (den == 0.0) throw EvalDomainError("division by zero", id);
        v = vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.a)])] / den;
        break;
      }
      case OpKind::Neg:
        v = -vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.a)])];
        break;
      case OpKind::Sin:
        v = std::sin(vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.a)])]);
        break;
      case OpKind::Cos:
        v = std::cos(vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.a)])]);
        break;
      case OpKind::Exp:
        v = std::exp(vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.a)])]);
        break;
      case OpKind::Sqrt: {
        const double x = vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.a)])];
        if (x < 0.0) throw EvalDomainError("sqrt of negative value", id);
        v = std::sqrt(x);
        break;
      }
      case OpKind::Pow: {
        const double x = vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(n.a)])];
        if (x < 0.0 && n.payload != std::floor(n.payload))
          throw EvalDomainError("pow of negative base with non-integer exponent", id);
        v = std::pow(x, n.payload);
        break;
      }
    }
    vals[k] = v;
  }
}

}  // namespace

ExprGraph::ExprGraph(int n_w, int n_p) : n_w_(n_w), n_p_(n_p) {
  constant(0.0);  // node 0 is the shared zero
  constant(1.0);
}

int ExprGraph::intern(Node n) {
  const std::uint64_t h = hash_node(n);
  auto& bucket = cse_[h];
  for (int id : bucket) {
    if (same_node(nodes_[static_cast<std::size_t>(id)], n)) return id;
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(n);
  bucket.push_back(id);
  return id;
}

bool ExprGraph::is_constant(int id, double v) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.kind == OpKind::Constant && n.payload == v;
}

int ExprGraph::constant(double v) { return intern({OpKind::Constant, -1, -1, v}); }

int ExprGraph::var(VarBlock block, int index) {
  const int limit = block == VarBlock::w ? n_w_ : n_p_;
  if (index < 0 || index >= limit) throw std::invalid_argument("variable index out of range");
  return intern({OpKind::Var, static_cast<std::int32_t>(block), index, 0.0});
}

int ExprGraph::add(int a, int b) {
  if (is_constant(a, 0.0)) return b;
  if (is_constant(b, 0.0)) return a;
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  const Node& nb = nodes_[static_cast<std::size_t>(b)];
  if (na.kind == OpKind::Constant && nb.kind == OpKind::Constant)
    return constant(na.payload + nb.payload);
  if (a > b) std::swap(a, b);
  return intern({OpKind::Add, a, b, 0.0});
}

int ExprGraph::sub(int a, int b) {
  if (is_constant(b, 0.0)) return a;
  if (is_constant(a, 0.0)) return neg(b);
  if (a == b) return constant(0.0);
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  const Node& nb = nodes_[static_cast<std::size_t>(b)];
  if (na.kind == OpKind::Constant && nb.kind == OpKind::Constant)
    return constant(na.payload - nb.payload);
  return intern({OpKind::Sub, a, b, 0.0});
}

int ExprGraph::mul(int a, int b) {
  if (is_constant(a, 0.0) || is_constant(b, 0.0)) return constant(0.0);
  if (is_constant(a, 1.0)) return b;
  if (is_constant(b, 1.0)) return a;
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  const Node& nb = nodes_[static_cast<std::size_t>(b)];
  if (na.kind == OpKind::Constant && nb.kind == OpKind::Constant)
    return constant(na.payload * nb.payload);
  if (a > b) std::swap(a, b);
  return intern({OpKind::Mul, a, b, 0.0});
}

int ExprGraph::div(int a, int b) {
  if (is_constant(a, 0.0)) return constant(0.0);
  if (is_constant(b, 1.0)) return a;
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  const Node& nb = nodes_[static_cast<std::size_t>(b)];
  if (na.kind == OpKind::Constant && nb.kind == OpKind::Constant && nb.payload != 0.0)
    return constant(na.payload / nb.payload);
  return intern({OpKind::Div, a, b, 0.0});
}

int ExprGraph::neg(int a) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  if (na.kind == OpKind::Constant) return constant(-na.payload);
  if (na.kind == OpKind::Neg) return na.a;
  return intern({OpKind::Neg, a, -1, 0.0});
}

int ExprGraph::sin_(int a) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  if (na.kind == OpKind::Constant) return constant(std::sin(na.payload));
  return intern({OpKind::Sin, a, -1, 0.0});
}

int ExprGraph::cos_(int a) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  if (na.kind == OpKind::Constant) return constant(std::cos(na.payload));
  return intern({OpKind::Cos, a, -1, 0.0});
}

int ExprGraph::exp_(int a) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  if (na.kind == OpKind::Constant) return constant(std::exp(na.payload));
  return intern({OpKind::Exp, a, -1, 0.0});
}

int ExprGraph::sqrt_(int a) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  if (na.kind == OpKind::Constant && na.payload >= 0.0) return constant(std::sqrt(na.payload));
  return intern({OpKind::Sqrt, a, -1, 0.0});
}

int ExprGraph::pow_(int a, double exponent) {
  if (exponent == 0.0) return constant(1.0);
  if (exponent == 1.0) return a;
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  if (na.kind == OpKind::Constant) return constant(std::pow(na.payload, exponent));
  return intern({OpKind::Pow, a, -1, exponent});
}

int ExprGraph::derivative(int id, VarBlock block, int index) {
  const std::uint64_t key = (static_cast<std::uint64_t>(id) << 33) |
                            (static_cast<std::uint64_t>(block) << 32) |
                            static_cast<std::uint64_t>(static_cast<std::uint32_t>(index));
  if (auto it = deriv_memo_.find(key); it != deriv_memo_.end()) return it->second;

  const Node n = nodes_[static_cast<std::size_t>(id)];
  int d = 0;
  switch (n.kind) {
    case OpKind::Constant:
      d = constant(0.0);
      break;
    case OpKind::Var:
      d = (n.a == static_cast<std::int32_t>(block) && n.b == index) ? constant(1.0)
                                                                    : constant(0.0);
      break;
    case OpKind::Add:
      d = add(derivative(n.a, block, index), derivative(n.b, block, index));
      break;
    case OpKind::Sub:
      d = sub(derivative(n.a, block, index), derivative(n.b, block, index));
      break;
    case OpKind::Mul:
      d = add(mul(derivative(n.a, block, index), n.b), mul(n.a, derivative(n.b, block, index)));
      break;
    case OpKind::Div: {
      const int da = derivative(n.a, block, index);
      const int db = derivative(n.b, block, index);
      d = div(sub(mul(da, n.b), mul(n.a, db)), mul(n.b, n.b));
      break;
    }
    case OpKind::Neg:
      d = neg(derivative(n.a, block, index));
      break;
    case OpKind::Sin:
      d = mul(cos_(n.a), derivative(n.a, block, index));
      break;
    case OpKind::Cos:
      d = neg(mul(sin_(n.a), derivative(n.a, block, index)));
      break;
    case OpKind::Exp:
      d = mul(id, derivative(n.a, block, index));
      break;
    case OpKind::Sqrt:
      d = div(derivative(n.a, block, index), mul(constant(2.0), id));
      break;
    case OpKind::Pow:
      d = mul(mul(constant(n.payload), pow_(n.a, n.payload - 1.0)),
              derivative(n.a, block, index));
      break;
  }
  deriv_memo_.emplace(key, d);
  return d;
}

void ExprGraph::check_dims(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const {
  if (w.size() != n_w_ || p.size() != n_p_)
    throw std::invalid_argument("ExprGraph: input dimension mismatch");
}

void ExprGraph::eval_roots(const std::vector<int>& roots, const Eigen::VectorXd& w,
                           const Eigen::VectorXd& p, double* out) const {
  check_dims(w, p);
  std::vector<std::int32_t> sched, slot;
  build_schedule(*this, roots, sched, slot);
  std::vector<double> vals;
  eval_schedule(*this, sched, slot, w, p, vals);
  for (std::size_t i = 0; i < roots.size(); ++i)
    out[i] = vals[static_cast<std::size_t>(slot[static_cast<std::size_t>(roots[i])])];
}

Eigen::VectorXd ExprGraph::evaluate(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const {
  Eigen::VectorXd out(outputs_.size());
  eval_roots(outputs_, w, p, out.data());
  return out;
}

MatrixEvaluator::MatrixEvaluator(const ExprGraph* graph, int rows, int cols,
                                 std::vector<Entry> entries)
    : graph_(graph), rows_(rows), cols_(cols), entries_(std::move(entries)) {
  std::vector<int> roots;
  roots.reserve(entries_.size());
  for (const auto& e : entries_) roots.push_back(e.root);
  build_schedule(*graph_, roots, sched_, slot_);
}

Eigen::MatrixXd MatrixEvaluator::eval(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows_, cols_);
  if (entries_.empty()) return out;
  std::vector<double> vals;
  eval_schedule(*graph_, sched_, slot_, w, p, vals);
  for (const auto& e : entries_)
    out(e.row, e.col) = vals[static_cast<std::size_t>(slot_[static_cast<std::size_t>(e.root)])];
  return out;
}

MatrixEvaluator make_jacobian(ExprGraph& graph, VarBlock block) {
  const int m = graph.num_outputs();
  const int n = block == VarBlock::w ? graph.num_w() : graph.num_p();
  std::vector<MatrixEvaluator::Entry> entries;
  for (int o = 0; o < m; ++o) {
    for (int j = 0; j < n; ++j) {
      const int d = graph.derivative(graph.outputs()[static_cast<std::size_t>(o)], block, j);
      if (graph.is_constant(d, 0.0)) continue;
      entries.push_back({d, o, j});
    }
  }
  return MatrixEvaluator(&graph, m, n, std::move(entries));
}

MatrixEvaluator make_value_evaluator(const ExprGraph& graph) {
  std::vector<MatrixEvaluator::Entry> entries;
  for (int o = 0; o < graph.num_outputs(); ++o)
    entries.push_back({static_cast<std::int32_t>(graph.outputs()[static_cast<std::size_t>(o)]),
                       o, 0});
  return MatrixEvaluator(&graph, graph.num_outputs(), 1, std::move(entries));
}

WeightedHessianEvaluator::WeightedHessianEvaluator(ExprGraph& graph, VarBlock row_block,
                                                   VarBlock col_block)
    : graph_(&graph), symmetric_(row_block == col_block) {
  rows_ = row_block == VarBlock::w ? graph.num_w() : graph.num_p();
  cols_ = col_block == VarBlock::w ? graph.num_w() : graph.num_p();
  for (int o = 0; o < graph.num_outputs(); ++o) {
    const int root = graph.outputs()[static_cast<std::size_t>(o)];
    for (int i = 0; i < rows_; ++i) {
      const int di = graph.derivative(root, row_block, i);
      if (graph.is_constant(di, 0.0)) continue;
      const int j0 = symmetric_ ? i : 0;
      for (int j = j0; j < cols_; ++j) {
        const int dij = graph.derivative(di, col_block, j);
        if (graph.is_constant(dij, 0.0)) continue;
        entries_.push_back({dij, o, i, j});
      }
    }
  }
  std::vector<int> roots;
  roots.reserve(entries_.size());
  for (const auto& e : entries_) roots.push_back(e.root);
  build_schedule(*graph_, roots, sched_, slot_);
}

Eigen::MatrixXd WeightedHessianEvaluator::eval(const Eigen::VectorXd& w,
                                               const Eigen::VectorXd& p,
                                               const Eigen::VectorXd& weights) const {
  if (weights.size() != graph_->num_outputs())
    throw std::invalid_argument("WeightedHessianEvaluator: weight dimension mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows_, cols_);
  if (entries_.empty()) return out;
  std::vector<double> vals;
  eval_schedule(*graph_, sched_, slot_, w, p, vals);
  for (const auto& e : entries_) {
    const double v =
        weights[e.output] *
        vals[static_cast<std::size_t>(slot_[static_cast<std::size_t>(e.root)])];
    out(e.row, e.col) += v;
    if (symmetric_ && e.row != e.col) out(e.col, e.row) += v;
  }
  return out;
}

Expr operator+(Expr a, Expr b) { return {a.g, a.g->add(a.id, b.id)}; }
Expr operator-(Expr a, Expr b) { return {a.g, a.g->sub(a.id, b.id)}; }
Expr operator*(Expr a, Expr b) { return {a.g, a.g->mul(a.id, b.id)}; }
Expr operator/(Expr a, Expr b) { return {a.g, a.g->div(a.id, b.id)}; }
Expr operator-(Expr a) { return {a.g, a.g->neg(a.id)}; }
Expr operator+(Expr a, double b) { return {a.g, a.g->add(a.id, a.g->constant(b))}; }
Expr operator+(double a, Expr b) { return b + a; }
Expr operator-(Expr a, double b) { return {a.g, a.g->sub(a.id, a.g->constant(b))}; }
Expr operator-(double a, Expr b) { return {b.g, b.g->sub(b.g->constant(a), b.id)}; }
Expr operator*(Expr a, double b) { return {a.g, a.g->mul(a.id, a.g->constant(b))}; }
Expr operator*(double a, Expr b) { return b * a; }
Expr operator/(Expr a, double b) { return {a.g, a.g->div(a.id, a.g->constant(b))}; }
Expr operator/(double a, Expr b) { return {b.g, b.g->div(b.g->constant(a), b.id)}; }
Expr sin(Expr a) { return {a.g, a.g->sin_(a.id)}; }
Expr cos(Expr a) { return {a.g, a.g->cos_(a.id)}; }
Expr exp(Expr a) { return {a.g, a.g->exp_(a.id)}; }
Expr sqrt(Expr a) { return {a.g, a.g->sqrt_(a.id)}; }
Expr pow(Expr a, double e) { return {a.g, a.g->pow_(a.id, e)}; }
Expr square(Expr a) { return {a.g, a.g->mul(a.id, a.id)}; }

}  // namespace sensaug
