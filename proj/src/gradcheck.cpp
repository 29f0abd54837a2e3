#include "cpf/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cpf {

std::string GradCheckReport::to_string() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-24s %10s %14s %14s  %s\n", "block", "entries",
                "max_rel_err", "max_abs_err", "status");
  out << line;
  for (const BlockCheck& b : blocks) {
    std::snprintf(line, sizeof(line), "%-24s %10d %14.3e %14.3e  %s\n", b.name.c_str(),
                  b.entries, b.max_rel_err, b.max_abs_err, b.pass ? "ok" : "FAIL");
    out << line;
  }
  std::snprintf(line, sizeof(line), "worst relative error %.3e (h=%.1e, tol=%.1e) -> %s\n",
                worst_rel_err, h, tol, pass ? "PASS" : "FAIL");
  out << line;
  return out.str();
}

GradCheckReport finite_diff_check(const std::function<double()>& loss_fn,
                                  const std::function<void()>& grad_fn,
                                  std::span<Parameter* const> params, double h, double tol) {
  GradCheckReport report;
  report.h = h;
  report.tol = tol;

  grad_fn();
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->grad);

  constexpr double kMagFloor = 1e-6;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter* p = params[pi];
    BlockCheck block;
    block.name = p->name;
    block.entries = p->value.size();
    for (int i = 0; i < p->value.size(); ++i) {
      const real_t saved = p->value[i];
      p->value[i] = saved + h;
      const double f_plus = loss_fn();
      p->value[i] = saved - h;
      const double f_minus = loss_fn();
      p->value[i] = saved;
      const double fd = (f_plus - f_minus) / (2.0 * h);
      const double an = analytic[pi][i];
      const double abs_err = std::fabs(an - fd);
      const double rel = abs_err / std::max({std::fabs(an), std::fabs(fd), kMagFloor});
      block.max_abs_err = std::max(block.max_abs_err, abs_err);
      block.max_rel_err = std::max(block.max_rel_err, rel);
    }
    block.pass = block.max_rel_err < tol;
    report.worst_rel_err = std::max(report.worst_rel_err, block.max_rel_err);
    report.pass = report.pass && block.pass;
    report.blocks.push_back(std::move(block));
  }
  return report;
}

}  // namespace cpf
