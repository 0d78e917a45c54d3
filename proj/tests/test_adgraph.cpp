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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sensaug/expr_graph.hpp"

using namespace sensaug;

namespace {

Expr wvar(ExprGraph& g, int i) { return {&g, g.var(VarBlock::w, i)}; }
Expr pvar(ExprGraph& g, int i) { return {&g, g.var(VarBlock::p, i)}; }

double eval1(ExprGraph& g, int root, const Eigen::VectorXd& w, const Eigen::VectorXd& p) {
  double out;
  g.eval_roots({root}, w, p, &out);
  return out;
}

}  // namespace

TEST_CASE("square evaluates: x^2 at x=3 is 9") {
  ExprGraph g(1, 0);
  Expr x = wvar(g, 0);
  CHECK(eval1(g, square(x).id, Eigen::VectorXd::Constant(1, 3.0), Eigen::VectorXd(0)) ==
        doctest::Approx(9.0).epsilon(1e-15));
}

TEST_CASE("sin evaluates: sin(0) = 0") {
  ExprGraph g(1, 0);
  Expr x = wvar(g, 0);
  CHECK(eval1(g, sin(x).id, Eigen::VectorXd::Zero(1), Eigen::VectorXd(0)) == 0.0);
}

TEST_CASE("pendulum torque balance at equilibrium evaluates to zero") {
  // u - b*wd - m*grav*l*sin(omega), m=l=1, grav=9.81, b=0.1 at rest.
  ExprGraph g(3, 0);
  Expr omega = wvar(g, 0), wd = wvar(g, 1), u = wvar(g, 2);
  Expr r = u - 0.1 * wd - 1.0 * 9.81 * 1.0 * sin(omega);
  CHECK(eval1(g, r.id, Eigen::VectorXd::Zero(3), Eigen::VectorXd(0)) == 0.0);
}

TEST_CASE("jacobian of linear constraint") {
  // c(w, p) = w1 + w2 - p.
  ExprGraph g(2, 1);
  Expr c = wvar(g, 0) + wvar(g, 1) - pvar(g, 0);
  g.set_outputs({c.id});
  MatrixEvaluator Jw = make_jacobian(g, VarBlock::w);
  MatrixEvaluator Jp = make_jacobian(g, VarBlock::p);
  const Eigen::VectorXd w = Eigen::VectorXd::Random(2), p = Eigen::VectorXd::Random(1);
  Eigen::MatrixXd jw = Jw.eval(w, p);
  CHECK(jw(0, 0) == 1.0);
  CHECK(jw(0, 1) == 1.0);
  CHECK(Jp.eval(w, p)(0, 0) == -1.0);
}

TEST_CASE("jacobian of bound row g = w - 1") {
  ExprGraph g(1, 0);
  Expr row = wvar(g, 0) - 1.0;
  g.set_outputs({row.id});
  CHECK(make_jacobian(g, VarBlock::w).eval(Eigen::VectorXd::Constant(1, 5.0),
                                           Eigen::VectorXd(0))(0, 0) == 1.0);
}

TEST_CASE("jacobian matches central finite differences on a smooth composite") {
  ExprGraph g(3, 2);
  Expr w0 = wvar(g, 0), w1 = wvar(g, 1), w2 = wvar(g, 2);
  Expr p0 = pvar(g, 0), p1 = pvar(g, 1);
  Expr f1 = sin(w0 * p0) + exp(w1 / 3.0) * cos(w2);
  Expr f2 = sqrt(square(w0) + square(p1) + 2.0) - w2 * w1 * p0;
  Expr f3 = pow(square(w1) + 1.0, 1.5) / (square(w2) + 0.5);
  g.set_outputs({f1.id, f2.id, f3.id});
  MatrixEvaluator Jw = make_jacobian(g, VarBlock::w);
  MatrixEvaluator Jp = make_jacobian(g, VarBlock::p);
  MatrixEvaluator val = make_value_evaluator(g);

  Eigen::VectorXd w(3), p(2);
  w << 0.7, -0.4, 1.3;
  p << 0.9, -1.1;
  const double h = 1e-6;
  Eigen::MatrixXd jw = Jw.eval(w, p);
  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXd wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    Eigen::MatrixXd fd = (val.eval(wp, p) - val.eval(wm, p)) / (2 * h);
    for (int i = 0; i < 3; ++i)
      CHECK(jw(i, j) == doctest::Approx(fd(i, 0)).epsilon(1e-6));
  }
  Eigen::MatrixXd jp = Jp.eval(w, p);
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd pp = p, pm = p;
    pp[j] += h;
    pm[j] -= h;
    Eigen::MatrixXd fd = (val.eval(w, pp) - val.eval(w, pm)) / (2 * h);
    for (int i = 0; i < 3; ++i)
      CHECK(jp(i, j) == doctest::Approx(fd(i, 0)).epsilon(1e-6));
  }
}

TEST_CASE("weighted Hessian: quadratic Lagrangian blocks") {
  // L = 1/2 (w1^2 + w2^2) + lambda (w1 + w2 - p): outputs are
  // [J; c] and weights select (1, lambda).
  ExprGraph g(2, 1);
  Expr w0 = wvar(g, 0), w1 = wvar(g, 1), p0 = pvar(g, 0);
  Expr J = 0.5 * (square(w0) + square(w1));
  Expr c = w0 + w1 - p0;
  g.set_outputs({J.id, c.id});
  WeightedHessianEvaluator Hww(g, VarBlock::w, VarBlock::w);
  WeightedHessianEvaluator Hwp(g, VarBlock::w, VarBlock::p);
  Eigen::VectorXd weights(2);
  weights << 1.0, -0.5;  // lambda = -0.5
  const Eigen::VectorXd w = Eigen::VectorXd::Random(2), p = Eigen::VectorXd::Random(1);
  CHECK((Hww.eval(w, p, weights) - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
  CHECK(Hwp.eval(w, p, weights).norm() == 0.0);
}

TEST_CASE("weighted Hessian: (w,p) cross block of (w-p)^2 + mu (w-1)") {
  ExprGraph g(1, 1);
  Expr w0 = wvar(g, 0), p0 = pvar(g, 0);
  g.set_outputs({square(w0 - p0).id, (w0 - 1.0).id});
  WeightedHessianEvaluator Hwp(g, VarBlock::w, VarBlock::p);
  Eigen::VectorXd weights(2);
  weights << 1.0, 3.7;  // any mu; constraint is linear
  CHECK(Hwp.eval(Eigen::VectorXd::Constant(1, 0.2), Eigen::VectorXd::Constant(1, 1.4),
                 weights)(0, 0) == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("weighted Hessian (w,w) is symmetric to machine precision") {
  ExprGraph g(3, 1);
  Expr w0 = wvar(g, 0), w1 = wvar(g, 1), w2 = wvar(g, 2), p0 = pvar(g, 0);
  Expr f = sin(w0 * w1) * exp(w2) + square(w0) * cos(w1 + p0) / (1.5 + square(w2));
  g.set_outputs({f.id});
  WeightedHessianEvaluator H(g, VarBlock::w, VarBlock::w);
  Eigen::VectorXd w(3);
  w << 0.3, -0.8, 0.6;
  Eigen::MatrixXd m =
      H.eval(w, Eigen::VectorXd::Constant(1, 0.4), Eigen::VectorXd::Constant(1, 1.0));
  CHECK((m - m.transpose()).norm() == 0.0);
}

TEST_CASE("hash consing collapses identical subexpressions") {
  ExprGraph g(1, 0);
  Expr x = wvar(g, 0);
  const int a = (sin(x) * sin(x)).id;
  const int b = (sin(x) * sin(x)).id;
  CHECK(a == b);
}

TEST_CASE("constant folding collapses independent derivatives to the shared zero") {
  ExprGraph g(2, 0);
  Expr x = wvar(g, 0);
  const int d = g.derivative(square(x).id, VarBlock::w, 1);  // d(x0^2)/dx1
  CHECK(g.is_constant(d, 0.0));
  const int before = g.size();
  (void)g.derivative(square(x).id, VarBlock::w, 1);  // memoized: no growth
  CHECK(g.size() == before);
}

TEST_CASE("division by zero reports the node index") {
  ExprGraph g(1, 0);
  Expr x = wvar(g, 0);
  Expr r = 1.0 / x;
  g.set_outputs({r.id});
  MatrixEvaluator val = make_value_evaluator(g);
  CHECK_THROWS_AS((void)val.eval(Eigen::VectorXd::Zero(1), Eigen::VectorXd(0)),
                  EvalDomainError);
}

TEST_CASE("evaluation is pure: repeated calls bit-identical") {
  ExprGraph g(2, 1);
  Expr f = sin(wvar(g, 0)) * exp(pvar(g, 0)) + sqrt(square(wvar(g, 1)) + 1.0);
  g.set_outputs({f.id});
  MatrixEvaluator val = make_value_evaluator(g);
  Eigen::VectorXd w(2), p(1);
  w << 0.123456, -7.89;
  p << 0.5;
  const double a = val.eval(w, p)(0, 0);
  const double b = val.eval(w, p)(0, 0);
  CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
}
