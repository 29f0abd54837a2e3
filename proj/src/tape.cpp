#include "cpf/tape.h"

#include <algorithm>
#include <cmath>

#include "cpf/error.h"

namespace cpf {

namespace {

constexpr real_t kBceClamp = 1e-7;

// Largest double below 1. Saturating activations clamp here so outputs stay
// strictly inside their open ranges for every finite input.
const real_t kOneBelow = std::nextafter(1.0, 0.0);
constexpr real_t kSigmoidFloor = 1e-300;

real_t stable_sigmoid(real_t x) {
  real_t y;
  if (x >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-x));
  } else {
    const real_t e = std::exp(x);
    y = e / (1.0 + e);
  }
  return std::clamp(y, kSigmoidFloor, kOneBelow);
}

real_t strict_tanh(real_t x) { return std::clamp(std::tanh(x), -kOneBelow, kOneBelow); }

void require_vector(const Tensor& t, const char* what) {
  if (t.rank() != 1) {
    throw DimensionError(std::string(what) + " expects a vector, got " + t.shape_str());
  }
}

}  // namespace

Value Tape::push(Tensor val, bool needs_grad, std::function<void(Tape&, int)> back) {
  nodes_.push_back(Node{std::move(val), Tensor{}, needs_grad, std::move(back)});
  return Value{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_buf(int id) {
  Node& n = node(id);
  if (n.grad.empty()) n.grad = Tensor(n.val.shape());
  return n.grad;
}

const Tensor& Tape::val(Value v) const { return node(v.id).val; }

Value Tape::constant(Tensor t) { return push(std::move(t), false, nullptr); }

Value Tape::param(Parameter& p) {
  Parameter* pp = &p;
  return push(p.value, true, [pp](Tape& t, int self) {
    add_in_place(pp->grad, t.node(self).grad);
  });
}

Value Tape::embed(Parameter& table, int row) {
  if (table.value.rank() != 2 || row < 0 || row >= table.value.rows()) {
    throw DimensionError("embed: row " + std::to_string(row) + " out of range for table " +
                         table.name + " " + table.value.shape_str());
  }
  const int d = table.value.cols();
  Tensor out({d});
  std::copy_n(table.value.row(row).data(), d, out.data());
  Parameter* tp = &table;
  return push(std::move(out), true, [tp, row](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    real_t* dst = tp->grad.row(row).data();
    for (int i = 0; i < g.size(); ++i) dst[i] += g[i];
  });
}

Value Tape::embed_mean(Parameter& table, const std::vector<int>& rows) {
  const int d = table.value.cols();
  Tensor out({d});
  if (rows.empty()) {
    return constant(std::move(out));
  }
  const real_t w = 1.0 / static_cast<real_t>(rows.size());
  for (int r : rows) {
    const real_t* src = table.value.row(r).data();
    for (int i = 0; i < d; ++i) out[i] += w * src[i];
  }
  Parameter* tp = &table;
  std::vector<int> rows_copy = rows;
  return push(std::move(out), true, [tp, rows_copy, w](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    for (int r : rows_copy) {
      real_t* dst = tp->grad.row(r).data();
      for (int i = 0; i < g.size(); ++i) dst[i] += w * g[i];
    }
  });
}

Value Tape::embed_weighted_mean(Parameter& table, const std::vector<real_t>& weights) {
  const int rows = table.value.rows();
  const int d = table.value.cols();
  if (static_cast<int>(weights.size()) != rows) {
    throw DimensionError("embed_weighted_mean: " + std::to_string(weights.size()) +
                         " weights for table " + table.value.shape_str());
  }
  real_t total = 0.0;
  for (real_t w : weights) total += w;
  Tensor out({d});
  if (total <= 0.0) {
    return constant(std::move(out));
  }
  for (int r = 0; r < rows; ++r) {
    if (weights[static_cast<size_t>(r)] == 0.0) continue;
    const real_t w = weights[static_cast<size_t>(r)] / total;
    const real_t* src = table.value.row(r).data();
    for (int i = 0; i < d; ++i) out[i] += w * src[i];
  }
  Parameter* tp = &table;
  std::vector<real_t> wn(weights);
  for (real_t& w : wn) w /= total;
  return push(std::move(out), true, [tp, wn](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    for (size_t r = 0; r < wn.size(); ++r) {
      if (wn[r] == 0.0) continue;
      real_t* dst = tp->grad.row(static_cast<int>(r)).data();
      for (int i = 0; i < g.size(); ++i) dst[i] += wn[r] * g[i];
    }
  });
}

Value Tape::linear(Value x, Parameter& W, Parameter& b) {
  const Tensor& xv = val(x);
  require_vector(xv, "linear input");
  const int m = xv.size();
  if (W.value.rank() != 2 || W.value.rows() != m) {
    throw DimensionError("linear: input " + xv.shape_str() + " does not conform with weight " +
                         W.name + " " + W.value.shape_str());
  }
  const int n = W.value.cols();
  if (b.value.size() != n) {
    throw DimensionError("linear: bias " + b.name + " " + b.value.shape_str() +
                         " does not conform with weight " + W.value.shape_str());
  }
  Tensor out({n});
  for (int j = 0; j < n; ++j) out[j] = b.value[j];
  for (int i = 0; i < m; ++i) {
    const real_t xi = xv[i];
    if (xi == 0.0) continue;
    const real_t* wrow = W.value.row(i).data();
    for (int j = 0; j < n; ++j) out[j] += xi * wrow[j];
  }
  Parameter* wp = &W;
  Parameter* bp = &b;
  const int xid = x.id;
  return push(std::move(out), true, [wp, bp, xid, m, n](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& xval = t.node(xid).val;
    for (int j = 0; j < n; ++j) bp->grad[j] += g[j];
    for (int i = 0; i < m; ++i) {
      real_t* wg = wp->grad.row(i).data();
      const real_t xi = xval[i];
      for (int j = 0; j < n; ++j) wg[j] += xi * g[j];
    }
    if (t.node(xid).needs_grad) {
      Tensor& xg = t.grad_buf(xid);
      for (int i = 0; i < m; ++i) {
        const real_t* wrow = wp->value.row(i).data();
        real_t acc = 0.0;
        for (int j = 0; j < n; ++j) acc += wrow[j] * g[j];
        xg[i] += acc;
      }
    }
  });
}

Value Tape::row_gate_sigmoid(Value h, Value tail, Parameter& W, Parameter& b) {
  const Tensor& hv = val(h);
  const Tensor& tv = val(tail);
  if (hv.rank() != 2) throw DimensionError("row_gate: state must be a matrix, got " + hv.shape_str());
  require_vector(tv, "row_gate tail");
  const int k_rows = hv.rows();
  const int d = hv.cols();
  const int m = d + tv.size();
  if (W.value.rank() != 2 || W.value.rows() != m || b.value.size() != W.value.cols()) {
    throw DimensionError("row_gate: input width " + std::to_string(m) +
                         " does not conform with weight " + W.name + " " + W.value.shape_str());
  }
  const int n = W.value.cols();
  Tensor out({k_rows, n});
  for (int k = 0; k < k_rows; ++k) {
    real_t* orow = out.row(k).data();
    for (int j = 0; j < n; ++j) orow[j] = b.value[j];
    const real_t* hrow = hv.row(k).data();
    for (int i = 0; i < d; ++i) {
      const real_t xi = hrow[i];
      const real_t* wrow = W.value.row(i).data();
      for (int j = 0; j < n; ++j) orow[j] += xi * wrow[j];
    }
    for (int i = 0; i < tv.size(); ++i) {
      const real_t xi = tv[i];
      const real_t* wrow = W.value.row(d + i).data();
      for (int j = 0; j < n; ++j) orow[j] += xi * wrow[j];
    }
    for (int j = 0; j < n; ++j) orow[j] = stable_sigmoid(orow[j]);
  }
  Parameter* wp = &W;
  Parameter* bp = &b;
  const int hid = h.id;
  const int tid = tail.id;
  return push(std::move(out), true, [wp, bp, hid, tid, k_rows, d, n](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& yv = t.node(self).val;
    const Tensor& hval = t.node(hid).val;
    const Tensor& tval = t.node(tid).val;
    const int tail_len = tval.size();
    const bool need_h = t.node(hid).needs_grad;
    const bool need_t = t.node(tid).needs_grad;
    std::vector<real_t> dz(static_cast<size_t>(n));
    for (int k = 0; k < k_rows; ++k) {
      const real_t* grow = g.row(k).data();
      const real_t* yrow = yv.row(k).data();
      for (int j = 0; j < n; ++j) dz[static_cast<size_t>(j)] = grow[j] * yrow[j] * (1.0 - yrow[j]);
      for (int j = 0; j < n; ++j) bp->grad[j] += dz[static_cast<size_t>(j)];
      const real_t* hrow = hval.row(k).data();
      for (int i = 0; i < d; ++i) {
        real_t* wg = wp->grad.row(i).data();
        const real_t xi = hrow[i];
        for (int j = 0; j < n; ++j) wg[j] += xi * dz[static_cast<size_t>(j)];
      }
      for (int i = 0; i < tail_len; ++i) {
        real_t* wg = wp->grad.row(d + i).data();
        const real_t xi = tval[i];
        for (int j = 0; j < n; ++j) wg[j] += xi * dz[static_cast<size_t>(j)];
      }
      if (need_h) {
        real_t* hg = t.grad_buf(hid).row(k).data();
        for (int i = 0; i < d; ++i) {
          const real_t* wrow = wp->value.row(i).data();
          real_t acc = 0.0;
          for (int j = 0; j < n; ++j) acc += wrow[j] * dz[static_cast<size_t>(j)];
          hg[i] += acc;
        }
      }
      if (need_t) {
        Tensor& tg = t.grad_buf(tid);
        for (int i = 0; i < tail_len; ++i) {
          const real_t* wrow = wp->value.row(d + i).data();
          real_t acc = 0.0;
          for (int j = 0; j < n; ++j) acc += wrow[j] * dz[static_cast<size_t>(j)];
          tg[i] += acc;
        }
      }
    }
  });
}

Value Tape::concat(const std::vector<Value>& parts) {
  if (parts.empty()) throw DimensionError("concat of zero parts");
  int total = 0;
  bool needs_grad = false;
  for (Value p : parts) {
    require_vector(val(p), "concat part");
    total += val(p).size();
    needs_grad = needs_grad || needs(p);
  }
  Tensor out({total});
  int off = 0;
  for (Value p : parts) {
    const Tensor& pv = val(p);
    std::copy_n(pv.data(), pv.size(), out.data() + off);
    off += pv.size();
  }
  if (!needs_grad) return constant(std::move(out));
  std::vector<int> ids;
  ids.reserve(parts.size());
  for (Value p : parts) ids.push_back(p.id);
  return push(std::move(out), true, [ids](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    int off2 = 0;
    for (int id : ids) {
      const int n = t.node(id).val.size();
      if (t.node(id).needs_grad) {
        Tensor& pg = t.grad_buf(id);
        for (int i = 0; i < n; ++i) pg[i] += g[off2 + i];
      }
      off2 += n;
    }
  });
}

Value Tape::add(Value a, Value b) {
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (!av.same_shape(bv)) {
    throw DimensionError("add shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
  }
  Tensor out(av.shape());
  for (int i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  if (!needs(a) && !needs(b)) return constant(std::move(out));
  const int aid = a.id, bid = b.id;
  return push(std::move(out), true, [aid, bid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    if (t.node(aid).needs_grad) add_in_place(t.grad_buf(aid), g);
    if (t.node(bid).needs_grad) add_in_place(t.grad_buf(bid), g);
  });
}

Value Tape::sub(Value a, Value b) {
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (!av.same_shape(bv)) {
    throw DimensionError("sub shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
  }
  Tensor out(av.shape());
  for (int i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  if (!needs(a) && !needs(b)) return constant(std::move(out));
  const int aid = a.id, bid = b.id;
  return push(std::move(out), true, [aid, bid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    if (t.node(aid).needs_grad) add_in_place(t.grad_buf(aid), g);
    if (t.node(bid).needs_grad) axpy(t.grad_buf(bid), -1.0, g);
  });
}

Value Tape::mul(Value a, Value b) {
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (!av.same_shape(bv)) {
    throw DimensionError("mul shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
  }
  Tensor out(av.shape());
  for (int i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  if (!needs(a) && !needs(b)) return constant(std::move(out));
  const int aid = a.id, bid = b.id;
  return push(std::move(out), true, [aid, bid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& av2 = t.node(aid).val;
    const Tensor& bv2 = t.node(bid).val;
    if (t.node(aid).needs_grad) {
      Tensor& ag = t.grad_buf(aid);
      for (int i = 0; i < g.size(); ++i) ag[i] += g[i] * bv2[i];
    }
    if (t.node(bid).needs_grad) {
      Tensor& bg = t.grad_buf(bid);
      for (int i = 0; i < g.size(); ++i) bg[i] += g[i] * av2[i];
    }
  });
}

Value Tape::scale(Value a, real_t c) {
  const Tensor& av = val(a);
  Tensor out(av.shape());
  for (int i = 0; i < out.size(); ++i) out[i] = c * av[i];
  if (!needs(a)) return constant(std::move(out));
  const int aid = a.id;
  return push(std::move(out), true, [aid, c](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    axpy(t.grad_buf(aid), c, g);
  });
}

Value Tape::add_scalar(Value v, Value s) {
  const Tensor& vv = val(v);
  const Tensor& sv = val(s);
  if (!sv.is_scalar()) {
    throw DimensionError("add_scalar: second argument must be scalar, got " + sv.shape_str());
  }
  Tensor out(vv.shape());
  const real_t c = sv[0];
  for (int i = 0; i < out.size(); ++i) out[i] = vv[i] + c;
  if (!needs(v) && !needs(s)) return constant(std::move(out));
  const int vid = v.id, sid = s.id;
  return push(std::move(out), true, [vid, sid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    if (t.node(vid).needs_grad) add_in_place(t.grad_buf(vid), g);
    if (t.node(sid).needs_grad) {
      real_t acc = 0.0;
      for (int i = 0; i < g.size(); ++i) acc += g[i];
      t.grad_buf(sid)[0] += acc;
    }
  });
}

Value Tape::sigmoid(Value v) {
  const Tensor& vv = val(v);
  Tensor out(vv.shape());
  for (int i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(vv[i]);
  if (!needs(v)) return constant(std::move(out));
  const int vid = v.id;
  return push(std::move(out), true, [vid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& y = t.node(self).val;
    Tensor& vg = t.grad_buf(vid);
    for (int i = 0; i < g.size(); ++i) vg[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Value Tape::tanh_act(Value v) {
  const Tensor& vv = val(v);
  Tensor out(vv.shape());
  for (int i = 0; i < out.size(); ++i) out[i] = strict_tanh(vv[i]);
  if (!needs(v)) return constant(std::move(out));
  const int vid = v.id;
  return push(std::move(out), true, [vid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& y = t.node(self).val;
    Tensor& vg = t.grad_buf(vid);
    for (int i = 0; i < g.size(); ++i) vg[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Value Tape::softmax(Value v) {
  const Tensor& vv = val(v);
  require_vector(vv, "softmax");
  if (vv.size() == 0) throw std::invalid_argument("softmax of empty vector");
  const int n = vv.size();
  real_t hi = vv[0];
  for (int i = 1; i < n; ++i) hi = std::max(hi, vv[i]);
  Tensor out({n});
  real_t z = 0.0;
  for (int i = 0; i < n; ++i) {
    out[i] = std::exp(vv[i] - hi);
    z += out[i];
  }
  for (int i = 0; i < n; ++i) out[i] /= z;
  if (!needs(v)) return constant(std::move(out));
  const int vid = v.id;
  return push(std::move(out), true, [vid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& y = t.node(self).val;
    real_t gy = 0.0;
    for (int i = 0; i < g.size(); ++i) gy += g[i] * y[i];
    Tensor& vg = t.grad_buf(vid);
    for (int i = 0; i < g.size(); ++i) vg[i] += y[i] * (g[i] - gy);
  });
}

Value Tape::dot(Value a, Value b) {
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (!av.same_shape(bv)) {
    throw DimensionError("dot shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
  }
  real_t acc = 0.0;
  for (int i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  if (!needs(a) && !needs(b)) return constant(Tensor::scalar(acc));
  const int aid = a.id, bid = b.id;
  return push(Tensor::scalar(acc), true, [aid, bid](Tape& t, int self) {
    const real_t g = t.node(self).grad[0];
    const Tensor& av2 = t.node(aid).val;
    const Tensor& bv2 = t.node(bid).val;
    if (t.node(aid).needs_grad) axpy(t.grad_buf(aid), g, bv2);
    if (t.node(bid).needs_grad) axpy(t.grad_buf(bid), g, av2);
  });
}

Value Tape::l2_norm(Value v) {
  const Tensor& vv = val(v);
  const real_t n = vv.norm();
  if (!needs(v)) return constant(Tensor::scalar(n));
  const int vid = v.id;
  return push(Tensor::scalar(n), true, [vid](Tape& t, int self) {
    const real_t g = t.node(self).grad[0];
    const real_t y = t.node(self).val[0];
    if (y <= 0.0) return;  // zero vector: subgradient 0
    axpy(t.grad_buf(vid), g / y, t.node(vid).val);
  });
}

Value Tape::div(Value a, Value b) {
  const real_t av = val(a).scalar_value();
  const real_t bv = val(b).scalar_value();
  const real_t out = av / bv;
  if (!needs(a) && !needs(b)) return constant(Tensor::scalar(out));
  const int aid = a.id, bid = b.id;
  return push(Tensor::scalar(out), true, [aid, bid](Tape& t, int self) {
    const real_t g = t.node(self).grad[0];
    const real_t av2 = t.node(aid).val[0];
    const real_t bv2 = t.node(bid).val[0];
    if (t.node(aid).needs_grad) t.grad_buf(aid)[0] += g / bv2;
    if (t.node(bid).needs_grad) t.grad_buf(bid)[0] -= g * av2 / (bv2 * bv2);
  });
}

Value Tape::weighted_sum(const std::vector<Value>& vectors, Value weights) {
  const Tensor& wv = val(weights);
  require_vector(wv, "weighted_sum weights");
  if (static_cast<size_t>(wv.size()) != vectors.size()) {
    throw DimensionError("weighted_sum: " + std::to_string(vectors.size()) + " vectors vs " +
                         std::to_string(wv.size()) + " weights");
  }
  if (vectors.empty()) throw DimensionError("weighted_sum of zero vectors");
  Tensor out(val(vectors[0]).shape());
  bool needs_grad = needs(weights);
  for (size_t i = 0; i < vectors.size(); ++i) {
    axpy(out, wv[static_cast<int>(i)], val(vectors[i]));
    needs_grad = needs_grad || needs(vectors[i]);
  }
  if (!needs_grad) return constant(std::move(out));
  std::vector<int> ids;
  ids.reserve(vectors.size());
  for (Value v : vectors) ids.push_back(v.id);
  const int wid = weights.id;
  return push(std::move(out), true, [ids, wid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& w = t.node(wid).val;
    const bool need_w = t.node(wid).needs_grad;
    for (size_t i = 0; i < ids.size(); ++i) {
      const int id = ids[i];
      if (t.node(id).needs_grad) axpy(t.grad_buf(id), w[static_cast<int>(i)], g);
      if (need_w) {
        real_t acc = 0.0;
        const Tensor& vi = t.node(id).val;
        for (int j = 0; j < g.size(); ++j) acc += g[j] * vi[j];
        t.grad_buf(wid)[static_cast<int>(i)] += acc;
      }
    }
  });
}

Value Tape::pool_rows(const Tensor& weights, Value matrix) {
  const Tensor& mv = val(matrix);
  if (mv.rank() != 2 || weights.size() != mv.rows()) {
    throw DimensionError("pool_rows: weights " + weights.shape_str() + " vs matrix " +
                         mv.shape_str());
  }
  const int k_rows = mv.rows();
  const int d = mv.cols();
  Tensor out({d});
  for (int k = 0; k < k_rows; ++k) {
    const real_t w = weights[k];
    if (w == 0.0) continue;
    const real_t* src = mv.row(k).data();
    for (int i = 0; i < d; ++i) out[i] += w * src[i];
  }
  if (!needs(matrix)) return constant(std::move(out));
  const int mid = matrix.id;
  Tensor w_copy = weights;
  return push(std::move(out), true, [mid, w_copy, k_rows, d](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tensor& mg = t.grad_buf(mid);
    for (int k = 0; k < k_rows; ++k) {
      const real_t w = w_copy[k];
      if (w == 0.0) continue;
      real_t* dst = mg.row(k).data();
      for (int i = 0; i < d; ++i) dst[i] += w * g[i];
    }
  });
}

Value Tape::outer_rows(const Tensor& weights, Value vec) {
  const Tensor& vv = val(vec);
  require_vector(vv, "outer_rows vector");
  const int k_rows = weights.size();
  const int d = vv.size();
  Tensor out({k_rows, d});
  for (int k = 0; k < k_rows; ++k) {
    const real_t w = weights[k];
    real_t* dst = out.row(k).data();
    for (int i = 0; i < d; ++i) dst[i] = w * vv[i];
  }
  if (!needs(vec)) return constant(std::move(out));
  const int vid = vec.id;
  Tensor w_copy = weights;
  return push(std::move(out), true, [vid, w_copy, k_rows, d](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tensor& vg = t.grad_buf(vid);
    for (int k = 0; k < k_rows; ++k) {
      const real_t w = w_copy[k];
      if (w == 0.0) continue;
      const real_t* grow = g.row(k).data();
      for (int i = 0; i < d; ++i) vg[i] += w * grow[i];
    }
  });
}

Value Tape::apply_mask(Value v, Tensor mask) {
  const Tensor& vv = val(v);
  if (!vv.same_shape(mask)) {
    throw DimensionError("mask shape mismatch " + vv.shape_str() + " vs " + mask.shape_str());
  }
  Tensor out(vv.shape());
  for (int i = 0; i < out.size(); ++i) out[i] = vv[i] * mask[i];
  if (!needs(v)) return constant(std::move(out));
  const int vid = v.id;
  Tensor m = std::move(mask);
  return push(std::move(out), true, [vid, m](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tensor& vg = t.grad_buf(vid);
    for (int i = 0; i < g.size(); ++i) vg[i] += g[i] * m[i];
  });
}

Value Tape::bce_sum(const std::vector<Value>& preds, const std::vector<real_t>& labels) {
  if (preds.size() != labels.size()) {
    throw DimensionError("bce_sum: " + std::to_string(preds.size()) + " predictions vs " +
                         std::to_string(labels.size()) + " labels");
  }
  real_t total = 0.0;
  bool needs_grad = false;
  for (size_t i = 0; i < preds.size(); ++i) {
    const real_t y = std::clamp(val(preds[i]).scalar_value(), kBceClamp, 1.0 - kBceClamp);
    const real_t a = labels[i];
    total += -(a * std::log(y) + (1.0 - a) * std::log(1.0 - y));
    needs_grad = needs_grad || needs(preds[i]);
  }
  if (!needs_grad) return constant(Tensor::scalar(total));
  std::vector<int> ids;
  ids.reserve(preds.size());
  for (Value p : preds) ids.push_back(p.id);
  std::vector<real_t> lab = labels;
  return push(Tensor::scalar(total), true, [ids, lab](Tape& t, int self) {
    const real_t g = t.node(self).grad[0];
    for (size_t i = 0; i < ids.size(); ++i) {
      if (!t.node(ids[i]).needs_grad) continue;
      const real_t raw = t.node(ids[i]).val[0];
      if (raw <= kBceClamp || raw >= 1.0 - kBceClamp) continue;  // clamped: flat
      const real_t a = lab[i];
      t.grad_buf(ids[i])[0] += g * (raw - a) / (raw * (1.0 - raw));
    }
  });
}

void Tape::backward(Value loss) {
  if (!loss.valid() || static_cast<size_t>(loss.id) >= nodes_.size()) {
    throw std::invalid_argument("backward: invalid loss handle");
  }
  Node& ln = node(loss.id);
  if (!ln.val.is_scalar()) {
    throw std::invalid_argument("backward requires a scalar loss, got shape " +
                                ln.val.shape_str());
  }
  grad_buf(loss.id)[0] += 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = node(id);
    if (!n.back || !n.needs_grad || n.grad.empty()) continue;
    n.back(*this, id);
  }
}

}  // namespace cpf
