#include "cmx/oracle.hpp"

namespace cmx {

namespace {
[[noreturn]] void unsupported(const char* what) {
  throw UnsupportedOracle(std::string("oracle does not provide ") + what);
}
}  // namespace

Vec CompositionalOracle::exact_g(const Vec&) const { unsupported("exact_g"); }
Mat CompositionalOracle::exact_jacobian(const Vec&) const { unsupported("exact_jacobian"); }
Vec CompositionalOracle::exact_grad_g_f(const Vec&, const Vec&) const { unsupported("exact_grad_g_f"); }
Vec CompositionalOracle::exact_grad_y_f(const Vec&, const Vec&) const { unsupported("exact_grad_y_f"); }
double CompositionalOracle::exact_f(const Vec&, const Vec&) const { unsupported("exact_f"); }
Vec CompositionalOracle::y_star(const Vec&) const { unsupported("y_star"); }
double CompositionalOracle::phi(const Vec&) const { unsupported("phi"); }
Vec CompositionalOracle::grad_phi(const Vec&) const { unsupported("grad_phi"); }

}  // namespace cmx
