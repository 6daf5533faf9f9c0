#include "ta3n/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>

#include "ta3n/error.hpp"

namespace ta3n::ad {

namespace {

Tape& tape_of(Var v) {
  if (!v.tape) throw Error("op applied to an unbound Var");
  return *v.tape;
}

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw Error("op inputs live on different tapes");
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

}  // namespace

Var affine(Var x, Var W, Var b) {
  require_same_tape(x, W);
  require_same_tape(x, b);
  const Tensor& xv = x.value();
  const Tensor& wv = W.value();
  const Tensor& bv = b.value();
  if (xv.rank() != 2 || wv.rank() != 2 || xv.dim(1) != wv.dim(0)) {
    throw ShapeError("affine: input " + shape_string(xv.shape()) + " does not match weight " +
                     shape_string(wv.shape()));
  }
  const std::size_t B = xv.dim(0), I = xv.dim(1), O = wv.dim(1);
  if (bv.size() != O) {
    throw ShapeError("affine: bias " + shape_string(bv.shape()) + " does not match weight " +
                     shape_string(wv.shape()));
  }
  Tensor out({B, O});
  for (std::size_t i = 0; i < B; ++i) {
    double* row = &out[i * O];
    for (std::size_t j = 0; j < O; ++j) row[j] = bv[j];
    for (std::size_t k = 0; k < I; ++k) {
      const double xik = xv[i * I + k];
      if (xik == 0.0) continue;
      const double* wrow = &wv[k * O];
      for (std::size_t j = 0; j < O; ++j) row[j] += xik * wrow[j];
    }
  }
  return tape_of(x).record(std::move(out), {x, W, b}, [x, W, b, B, I, O](Tape& t, std::span<const double> g) {
    const Tensor& xv = t.value(x);
    const Tensor& wv = t.value(W);
    if (t.requires_grad(x)) {
      auto gx = t.grad_slot(x);
      for (std::size_t i = 0; i < B; ++i) {
        for (std::size_t k = 0; k < I; ++k) {
          double acc = 0.0;
          const double* wrow = &wv[k * O];
          for (std::size_t j = 0; j < O; ++j) acc += g[i * O + j] * wrow[j];
          gx[i * I + k] += acc;
        }
      }
    }
    if (t.requires_grad(W)) {
      auto gw = t.grad_slot(W);
      for (std::size_t i = 0; i < B; ++i) {
        for (std::size_t k = 0; k < I; ++k) {
          const double xik = xv[i * I + k];
          if (xik == 0.0) continue;
          for (std::size_t j = 0; j < O; ++j) gw[k * O + j] += xik * g[i * O + j];
        }
      }
    }
    if (t.requires_grad(b)) {
      auto gb = t.grad_slot(b);
      for (std::size_t i = 0; i < B; ++i) {
        for (std::size_t j = 0; j < O; ++j) gb[j] += g[i * O + j];
      }
    }
  });
}

Var relu(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return tape_of(x).record(std::move(out), {x}, [x](Tape& t, std::span<const double> g) {
    const Tensor& xv = t.value(x);
    auto gx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var softmax(Var logits) {
  const Tensor& lv = logits.value();
  if (lv.rank() != 2 || lv.dim(1) < 2) {
    throw ShapeError("softmax: expected B×C with C >= 2, got " + shape_string(lv.shape()));
  }
  const std::size_t B = lv.dim(0), C = lv.dim(1);
  Tensor out({B, C});
  for (std::size_t i = 0; i < B; ++i) {
    const double* row = &lv[i * C];
    const double mx = *std::max_element(row, row + C);
    double z = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      out[i * C + c] = std::exp(row[c] - mx);
      z += out[i * C + c];
    }
    for (std::size_t c = 0; c < C; ++c) out[i * C + c] /= z;
  }
  Tape& tape = tape_of(logits);
  const std::size_t out_id = tape.size();
  return tape.record(std::move(out), {logits}, [logits, out_id, B, C](Tape& t, std::span<const double> g) {
    const Tensor& p = t.value(Var{&t, out_id});
    auto gl = t.grad_slot(logits);
    for (std::size_t i = 0; i < B; ++i) {
      double dot = 0.0;
      for (std::size_t c = 0; c < C; ++c) dot += g[i * C + c] * p[i * C + c];
      for (std::size_t c = 0; c < C; ++c) gl[i * C + c] += p[i * C + c] * (g[i * C + c] - dot);
    }
  });
}

Var mean_over_time(Var x) {
  const Tensor& xv = x.value();
  std::size_t B = 1, T = 0, D = 0;
  Shape out_shape;
  if (xv.rank() == 2) {
    T = xv.dim(0);
    D = xv.dim(1);
    out_shape = {D};
  } else if (xv.rank() == 3) {
    B = xv.dim(0);
    T = xv.dim(1);
    D = xv.dim(2);
    out_shape = {B, D};
  } else {
    throw ShapeError("mean_over_time: expected T×D or B×T×D, got " + shape_string(xv.shape()));
  }
  // Tensor extents are positive, so T >= 1; empty videos are rejected by train::sample_frames.
  Tensor out(out_shape);
  const double inv = 1.0 / static_cast<double>(T);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      const double* row = &xv[(b * T + t) * D];
      for (std::size_t j = 0; j < D; ++j) out[b * D + j] += row[j];
    }
    for (std::size_t j = 0; j < D; ++j) out[b * D + j] *= inv;
  }
  return tape_of(x).record(std::move(out), {x}, [x, B, T, D, inv](Tape& t, std::span<const double> g) {
    auto gx = t.grad_slot(x);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t s = 0; s < T; ++s) {
        for (std::size_t j = 0; j < D; ++j) gx[(b * T + s) * D + j] += g[b * D + j] * inv;
      }
    }
  });
}

Var concat(std::span<const Var> xs) {
  if (xs.empty()) throw ShapeError("concat: empty input sequence");
  const Shape& first = xs.front().shape();
  const std::size_t lead = shape_size(first) / first.back();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& v : xs) {
    require_same_tape(xs.front(), v);
    const Shape& s = v.shape();
    if (s.size() != first.size() || !std::equal(s.begin(), s.end() - 1, first.begin())) {
      throw ShapeError("concat: leading extents differ, " + shape_string(first) + " vs " + shape_string(s));
    }
    widths.push_back(s.back());
    total += s.back();
  }
  Shape out_shape = first;
  out_shape.back() = total;
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Tensor& v = xs[k].value();
    for (std::size_t r = 0; r < lead; ++r) {
      std::copy_n(&v[r * widths[k]], widths[k], &out[r * total + offset]);
    }
    offset += widths[k];
  }
  std::vector<Var> inputs(xs.begin(), xs.end());
  return tape_of(xs.front()).record(std::move(out), xs,
      [inputs, widths, lead, total](Tape& t, std::span<const double> g) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          if (t.requires_grad(inputs[k])) {
            auto gx = t.grad_slot(inputs[k]);
            for (std::size_t r = 0; r < lead; ++r) {
              for (std::size_t j = 0; j < widths[k]; ++j) gx[r * widths[k] + j] += g[r * total + offset + j];
            }
          }
          offset += widths[k];
        }
      });
}

Var grl(Var x, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("grl: lambda must be nonnegative, got " + std::to_string(lambda));
  return tape_of(x).record(x.value(), {x}, [x, lambda](Tape& t, std::span<const double> g) {
    auto gx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += -lambda * g[i];
  });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("add", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape& t, std::span<const double> g) {
    for (Var v : {a, b}) {
      if (!t.requires_grad(v)) continue;
      auto gv = t.grad_slot(v);
      for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("mul", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape& t, std::span<const double> g) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    if (t.requires_grad(a)) {
      auto ga = t.grad_slot(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(b)) {
      auto gb = t.grad_slot(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (double& v : out.values()) v *= factor;
  return tape_of(x).record(std::move(out), {x}, [x, factor](Tape& t, std::span<const double> g) {
    auto gx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

Var scale_rows(Var x, std::span<const double> factors) {
  const Tensor& xv = x.value();
  const std::size_t R = xv.rows(), C = xv.cols();
  if (factors.size() != R) {
    throw ShapeError("scale_rows: " + std::to_string(factors.size()) + " factors for " +
                     shape_string(xv.shape()));
  }
  Tensor out = xv;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) out[r * C + c] *= factors[r];
  }
  std::vector<double> f(factors.begin(), factors.end());
  return tape_of(x).record(std::move(out), {x}, [x, f = std::move(f), C](Tape& t, std::span<const double> g) {
    auto gx = t.grad_slot(x);
    for (std::size_t r = 0; r < f.size(); ++r) {
      for (std::size_t c = 0; c < C; ++c) gx[r * C + c] += f[r] * g[r * C + c];
    }
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return tape_of(x).record(Tensor::scalar(s), {x}, [x](Tape& t, std::span<const double> g) {
    auto gx = t.grad_slot(x);
    for (double& v : gx) v += g[0];
  });
}

Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var reshape(Var x, Shape shape) {
  return tape_of(x).record(x.value().reshaped(std::move(shape)), {x}, [x](Tape& t, std::span<const double> g) {
    auto gx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var gather_rows(Var x, std::span<const std::size_t> rows) {
  const Tensor& xv = x.value();
  const std::size_t R = xv.rows(), C = xv.cols();
  if (rows.empty()) throw ShapeError("gather_rows: no rows requested");
  Tensor out({rows.size(), C});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= R) {
      throw ShapeError("gather_rows: row " + std::to_string(rows[k]) + " out of range for " +
                       shape_string(xv.shape()));
    }
    std::copy_n(&xv[rows[k] * C], C, &out[k * C]);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return tape_of(x).record(std::move(out), {x}, [x, idx = std::move(idx), C](Tape& t, std::span<const double> g) {
    auto gx = t.grad_slot(x);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      for (std::size_t c = 0; c < C; ++c) gx[idx[k] * C + c] += g[k * C + c];
    }
  });
}

}  // namespace ta3n::ad
