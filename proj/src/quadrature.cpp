#include "masolve/quadrature.hpp"

#include <stdexcept>

namespace masolve {

namespace {

TriangleRule make_rule(int order) {
  TriangleRule r;
  switch (order) {
    case 1:
      r.nodes = {{1.0 / 3, 1.0 / 3, 1.0 / 3}};
      r.weights = {1.0};
      break;
    case 2:
      r.nodes = {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}};
      r.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
      break;
    case 5: {
      const double s = std::sqrt(15.0);
      const double a1 = (9.0 - 2.0 * s) / 21.0, b1 = (6.0 + s) / 21.0;
      const double a2 = (9.0 + 2.0 * s) / 21.0, b2 = (6.0 - s) / 21.0;
      const double w1 = (155.0 + s) / 1200.0, w2 = (155.0 - s) / 1200.0;
      r.nodes = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                 {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
      r.weights = {9.0 / 40, w1, w1, w1, w2, w2, w2};
      break;
    }
    default:
      throw std::invalid_argument("triangle_rule: order must be 1, 2 or 5");
  }
  return r;
}

}  // namespace

const TriangleRule& triangle_rule(int order) {
  static const TriangleRule r1 = make_rule(1);
  static const TriangleRule r2 = make_rule(2);
  static const TriangleRule r5 = make_rule(5);
  switch (order) {
    case 1:
      return r1;
    case 2:
      return r2;
    case 5:
      return r5;
    default:
      throw std::invalid_argument("triangle_rule: order must be 1, 2 or 5");
  }
}

}  // namespace masolve
