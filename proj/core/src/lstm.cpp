#include "tailvar/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "tailvar/errors.hpp"

namespace tailvar {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void ensure_shape(Matrix& m, std::size_t rows, std::size_t cols) {
  if (m.rows() != rows || m.cols() != cols) m = Matrix(rows, cols);
}

void ensure_size(Vec& v, std::size_t n) {
  if (v.size() != n) v.assign(n, 0.0);
}

}  // namespace

LstmWeights LstmWeights::shaped(std::size_t hidden, std::size_t input,
                                std::size_t head_dim) {
  LstmWeights w;
  w.w_f = Matrix(hidden, input);
  w.w_i = Matrix(hidden, input);
  w.w_o = Matrix(hidden, input);
  w.w_g = Matrix(hidden, input);
  w.u_f = Matrix(hidden, hidden);
  w.u_i = Matrix(hidden, hidden);
  w.u_o = Matrix(hidden, hidden);
  w.u_g = Matrix(hidden, hidden);
  w.b_f.assign(hidden, 0.0);
  w.b_i.assign(hidden, 0.0);
  w.b_o.assign(hidden, 0.0);
  w.b_g.assign(hidden, 0.0);
  w.w_out = Matrix(head_dim, hidden);
  w.b_out.assign(head_dim, 0.0);
  return w;
}

std::vector<std::span<double>> LstmWeights::blocks() {
  return {w_f.flat(), w_i.flat(), w_o.flat(), w_g.flat(),
          u_f.flat(), u_i.flat(), u_o.flat(), u_g.flat(),
          {b_f.data(), b_f.size()}, {b_i.data(), b_i.size()},
          {b_o.data(), b_o.size()}, {b_g.data(), b_g.size()},
          w_out.flat(), {b_out.data(), b_out.size()}};
}

std::vector<std::span<const double>> LstmWeights::blocks() const {
  return {w_f.flat(), w_i.flat(), w_o.flat(), w_g.flat(),
          u_f.flat(), u_i.flat(), u_o.flat(), u_g.flat(),
          {b_f.data(), b_f.size()}, {b_i.data(), b_i.size()},
          {b_o.data(), b_o.size()}, {b_g.data(), b_g.size()},
          w_out.flat(), {b_out.data(), b_out.size()}};
}

std::size_t LstmWeights::param_count() const {
  std::size_t n = 0;
  for (auto block : blocks()) n += block.size();
  return n;
}

Vec LstmWeights::flatten() const {
  Vec flat;
  flat.reserve(param_count());
  for (auto block : blocks()) flat.insert(flat.end(), block.begin(), block.end());
  return flat;
}

void LstmWeights::assign_flat(std::span<const double> flat) {
  if (flat.size() != param_count()) {
    throw std::invalid_argument("assign_flat: size mismatch");
  }
  std::size_t pos = 0;
  for (auto block : blocks()) {
    for (double& w : block) w = flat[pos++];
  }
}

void LstmWeights::add_scaled(const LstmWeights& other, double factor) {
  auto dst = blocks();
  auto src = other.blocks();
  for (std::size_t b = 0; b < dst.size(); ++b) {
    if (dst[b].size() != src[b].size()) {
      throw std::invalid_argument("add_scaled: shape mismatch");
    }
    for (std::size_t k = 0; k < dst[b].size(); ++k) {
      dst[b][k] += factor * src[b][k];
    }
  }
}

void LstmWeights::scale(double factor) {
  for (auto block : blocks()) {
    for (double& w : block) w *= factor;
  }
}

double LstmWeights::squared_norm() const {
  double acc = 0.0;
  for (auto block : blocks()) {
    for (double w : block) acc += w * w;
  }
  return acc;
}

bool LstmWeights::all_finite() const {
  for (auto block : blocks()) {
    for (double w : block) {
      if (!std::isfinite(w)) return false;
    }
  }
  return true;
}

LstmModel lstm_init(std::size_t hidden, HeadKind head_kind,
                    std::size_t head_dim, Prng& rng,
                    const HeadBounds& bounds) {
  if (hidden == 0) throw std::invalid_argument("lstm_init: hidden must be >= 1");
  if (head_kind == HeadKind::htqf && head_dim != 4) {
    throw std::invalid_argument("lstm_init: htqf head requires head_dim = 4");
  }
  if (head_dim == 0) throw std::invalid_argument("lstm_init: head_dim must be >= 1");

  LstmModel model;
  model.hidden = hidden;
  model.input = 4;
  model.head_kind = head_kind;
  model.head_dim = head_dim;
  model.bounds = bounds;
  model.weights = LstmWeights::shaped(hidden, model.input, head_dim);

  const double s = 1.0 / std::sqrt(static_cast<double>(hidden));
  auto draw = [&](Matrix& m) {
    for (double& w : m.flat()) w = rng.next_range(-s, s);
  };
  auto& w = model.weights;
  draw(w.w_f);
  draw(w.w_i);
  draw(w.w_o);
  draw(w.w_g);
  draw(w.u_f);
  draw(w.u_i);
  draw(w.u_o);
  draw(w.u_g);
  draw(w.w_out);
  w.b_f.assign(hidden, 1.0);
  return model;
}

HtqfParams map_head_htqf(std::span<const double> head_tanh,
                         const HeadBounds& bounds) {
  if (head_tanh.size() != 4) {
    throw std::invalid_argument("map_head_htqf: need 4 components");
  }
  if (bounds.map == HeadMapKind::identity) {
    return HtqfParams::unchecked(head_tanh[0], head_tanh[1], head_tanh[2],
                                 head_tanh[3], bounds.A);
  }
  const double mu = bounds.c_mu * head_tanh[0];
  const double sigma =
      bounds.sigma_min +
      (bounds.sigma_max - bounds.sigma_min) * (head_tanh[1] + 1.0) * 0.5;
  const double u = bounds.u_max * (head_tanh[2] + 1.0) * 0.5;
  const double v = bounds.v_max * (head_tanh[3] + 1.0) * 0.5;
  return HtqfParams::unchecked(mu, sigma, u, v, bounds.A);
}

Vec map_head_tqr(std::span<const double> head_tanh, const HeadBounds& bounds) {
  Vec out(head_tanh.begin(), head_tanh.end());
  if (bounds.map == HeadMapKind::bounded) {
    for (double& q : out) q *= bounds.c_q;
  }
  return out;
}

Vec lstm_forward(const LstmModel& model, const Matrix& window,
                 ForwardTrace* trace) {
  const std::size_t H = model.hidden;
  const std::size_t L = window.rows();
  if (window.cols() != model.input) {
    throw std::invalid_argument("lstm_forward: window has wrong column count");
  }
  if (L == 0) throw std::invalid_argument("lstm_forward: empty window");

  ForwardTrace local;
  ForwardTrace& tr = trace ? *trace : local;
  tr.steps = L;
  ensure_shape(tr.x, L, model.input);
  std::copy(window.flat().begin(), window.flat().end(), tr.x.flat().begin());
  ensure_shape(tr.f, L, H);
  ensure_shape(tr.i, L, H);
  ensure_shape(tr.o, L, H);
  ensure_shape(tr.g, L, H);
  ensure_shape(tr.c, L, H);
  ensure_shape(tr.tanh_c, L, H);
  ensure_shape(tr.h, L, H);

  const auto& w = model.weights;
  Vec a_f(H), a_i(H), a_o(H), a_g(H);
  Vec h_prev(H, 0.0), c_prev(H, 0.0);

  for (std::size_t j = 0; j < L; ++j) {
    const auto x_j = window.row(j);
    gemv(w.w_f, x_j, a_f);
    gemv(w.u_f, h_prev, a_f, true);
    gemv(w.w_i, x_j, a_i);
    gemv(w.u_i, h_prev, a_i, true);
    gemv(w.w_o, x_j, a_o);
    gemv(w.u_o, h_prev, a_o, true);
    gemv(w.w_g, x_j, a_g);
    gemv(w.u_g, h_prev, a_g, true);
    for (std::size_t k = 0; k < H; ++k) {
      const double f = logistic(a_f[k] + w.b_f[k]);
      const double i = logistic(a_i[k] + w.b_i[k]);
      const double o = logistic(a_o[k] + w.b_o[k]);
      const double g = std::tanh(a_g[k] + w.b_g[k]);
      const double c = f * c_prev[k] + i * g;
      const double tc = std::tanh(c);
      const double h = o * tc;
      tr.f(j, k) = f;
      tr.i(j, k) = i;
      tr.o(j, k) = o;
      tr.g(j, k) = g;
      tr.c(j, k) = c;
      tr.tanh_c(j, k) = tc;
      tr.h(j, k) = h;
      c_prev[k] = c;
      h_prev[k] = h;
    }
  }

  ensure_size(tr.head_raw, model.head_dim);
  ensure_size(tr.head_tanh, model.head_dim);
  gemv(w.w_out, h_prev, tr.head_raw);
  for (std::size_t k = 0; k < model.head_dim; ++k) {
    tr.head_tanh[k] = std::tanh(tr.head_raw[k] + w.b_out[k]);
  }

  if (model.head_kind == HeadKind::htqf) {
    const HtqfParams p = map_head_htqf(tr.head_tanh, model.bounds);
    tr.output = {p.mu, p.sigma, p.u, p.v};
  } else {
    tr.output = map_head_tqr(tr.head_tanh, model.bounds);
  }
  return tr.output;
}

void lstm_backward_into(const LstmModel& model, const ForwardTrace& trace,
                        std::span<const double> d_output, LstmWeights& grad) {
  const std::size_t H = model.hidden;
  const std::size_t L = trace.steps;
  if (trace.f.rows() != L || trace.f.cols() != H ||
      trace.x.cols() != model.input ||
      trace.head_tanh.size() != model.head_dim) {
    throw std::invalid_argument("lstm_backward: trace does not match model");
  }
  if (d_output.size() != model.head_dim) {
    throw std::invalid_argument("lstm_backward: d_output has wrong size");
  }

  // Head map is diagonal, then tanh.
  Vec d_raw(model.head_dim);
  for (std::size_t k = 0; k < model.head_dim; ++k) {
    double slope = 1.0;
    if (model.bounds.map == HeadMapKind::bounded) {
      if (model.head_kind == HeadKind::htqf) {
        switch (k) {
          case 0: slope = model.bounds.c_mu; break;
          case 1: slope = 0.5 * (model.bounds.sigma_max - model.bounds.sigma_min); break;
          case 2: slope = 0.5 * model.bounds.u_max; break;
          default: slope = 0.5 * model.bounds.v_max; break;
        }
      } else {
        slope = model.bounds.c_q;
      }
    }
    const double a = trace.head_tanh[k];
    d_raw[k] = d_output[k] * slope * (1.0 - a * a);
  }

  const auto& w = model.weights;
  add_outer(grad.w_out, d_raw, trace.h.row(L - 1));
  for (std::size_t k = 0; k < model.head_dim; ++k) grad.b_out[k] += d_raw[k];

  Vec d_h(H, 0.0), d_c(H, 0.0);
  gemv_transposed_add(w.w_out, d_raw, d_h);

  Vec d_af(H), d_ai(H), d_ao(H), d_ag(H);
  for (std::size_t j = L; j-- > 0;) {
    for (std::size_t k = 0; k < H; ++k) {
      const double o = trace.o(j, k);
      const double tc = trace.tanh_c(j, k);
      const double dc = d_c[k] + d_h[k] * o * (1.0 - tc * tc);
      const double c_prev = j > 0 ? trace.c(j - 1, k) : 0.0;
      const double f = trace.f(j, k);
      const double i = trace.i(j, k);
      const double g = trace.g(j, k);
      d_af[k] = dc * c_prev * f * (1.0 - f);
      d_ai[k] = dc * g * i * (1.0 - i);
      d_ao[k] = d_h[k] * tc * o * (1.0 - o);
      d_ag[k] = dc * i * (1.0 - g * g);
      d_c[k] = dc * f;
    }
    const auto x_j = trace.x.row(j);
    add_outer(grad.w_f, d_af, x_j);
    add_outer(grad.w_i, d_ai, x_j);
    add_outer(grad.w_o, d_ao, x_j);
    add_outer(grad.w_g, d_ag, x_j);
    if (j > 0) {
      const auto h_prev = trace.h.row(j - 1);
      add_outer(grad.u_f, d_af, h_prev);
      add_outer(grad.u_i, d_ai, h_prev);
      add_outer(grad.u_o, d_ao, h_prev);
      add_outer(grad.u_g, d_ag, h_prev);
    }
    for (std::size_t k = 0; k < H; ++k) {
      grad.b_f[k] += d_af[k];
      grad.b_i[k] += d_ai[k];
      grad.b_o[k] += d_ao[k];
      grad.b_g[k] += d_ag[k];
    }
    // Hidden-state gradient for step j-1 flows through all four gates.
    d_h.assign(H, 0.0);
    gemv_transposed_add(w.u_f, d_af, d_h);
    gemv_transposed_add(w.u_i, d_ai, d_h);
    gemv_transposed_add(w.u_o, d_ao, d_h);
    gemv_transposed_add(w.u_g, d_ag, d_h);
  }
}

LstmWeights lstm_backward(const LstmModel& model, const ForwardTrace& trace,
                          std::span<const double> d_output) {
  LstmWeights grad =
      LstmWeights::shaped(model.hidden, model.input, model.head_dim);
  lstm_backward_into(model, trace, d_output, grad);
  return grad;
}

namespace {

const char* head_kind_name(HeadKind kind) {
  return kind == HeadKind::htqf ? "htqf" : "tqr";
}

const char* map_kind_name(HeadMapKind kind) {
  return kind == HeadMapKind::bounded ? "bounded" : "identity";
}

void write_hex(std::ofstream& out, const char* key, double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%a", value);
  out << key << ' ' << buffer << '\n';
}

double parse_hex(const std::string& token, const std::string& path) {
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) {
    throw DataError("'" + path + "': bad numeric token '" + token + "'");
  }
  return value;
}

}  // namespace

void save_model(const LstmModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "tailvar-lstm 1\n";
  out << "hidden " << model.hidden << '\n';
  out << "input " << model.input << '\n';
  out << "head " << head_kind_name(model.head_kind) << '\n';
  out << "head_dim " << model.head_dim << '\n';
  out << "window_len " << model.window_len << '\n';
  out << "map " << map_kind_name(model.bounds.map) << '\n';
  write_hex(out, "c_mu", model.bounds.c_mu);
  write_hex(out, "sigma_min", model.bounds.sigma_min);
  write_hex(out, "sigma_max", model.bounds.sigma_max);
  write_hex(out, "u_max", model.bounds.u_max);
  write_hex(out, "v_max", model.bounds.v_max);
  write_hex(out, "c_q", model.bounds.c_q);
  write_hex(out, "A", model.bounds.A);
  const Vec flat = model.weights.flatten();
  out << "weights " << flat.size() << '\n';
  char buffer[48];
  for (std::size_t k = 0; k < flat.size(); ++k) {
    std::snprintf(buffer, sizeof buffer, "%a", flat[k]);
    out << buffer << ((k + 1) % 8 == 0 || k + 1 == flat.size() ? '\n' : ' ');
  }
  if (!out) throw DataError("failed while writing '" + path + "'");
}

LstmModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (!in || magic != "tailvar-lstm" || version != 1) {
    throw DataError("'" + path + "' is not a version-1 model file");
  }

  LstmModel model;
  std::string key, token;
  std::size_t weight_count = 0;
  while (in >> key) {
    if (key == "weights") {
      in >> weight_count;
      break;
    }
    if (!(in >> token)) break;
    if (key == "hidden") {
      model.hidden = std::stoul(token);
    } else if (key == "input") {
      model.input = std::stoul(token);
    } else if (key == "head") {
      if (token == "htqf") {
        model.head_kind = HeadKind::htqf;
      } else if (token == "tqr") {
        model.head_kind = HeadKind::tqr;
      } else {
        throw DataError("'" + path + "': unknown head kind '" + token + "'");
      }
    } else if (key == "head_dim") {
      model.head_dim = std::stoul(token);
    } else if (key == "window_len") {
      model.window_len = std::stoul(token);
    } else if (key == "map") {
      if (token == "bounded") {
        model.bounds.map = HeadMapKind::bounded;
      } else if (token == "identity") {
        model.bounds.map = HeadMapKind::identity;
      } else {
        throw DataError("'" + path + "': unknown head map '" + token + "'");
      }
    } else if (key == "c_mu") {
      model.bounds.c_mu = parse_hex(token, path);
    } else if (key == "sigma_min") {
      model.bounds.sigma_min = parse_hex(token, path);
    } else if (key == "sigma_max") {
      model.bounds.sigma_max = parse_hex(token, path);
    } else if (key == "u_max") {
      model.bounds.u_max = parse_hex(token, path);
    } else if (key == "v_max") {
      model.bounds.v_max = parse_hex(token, path);
    } else if (key == "c_q") {
      model.bounds.c_q = parse_hex(token, path);
    } else if (key == "A") {
      model.bounds.A = parse_hex(token, path);
    } else {
      throw DataError("'" + path + "': unknown field '" + key + "'");
    }
  }
  if (model.hidden == 0 || model.head_dim == 0 || model.input == 0) {
    throw DataError("'" + path + "': missing dimensions");
  }
  model.weights =
      LstmWeights::shaped(model.hidden, model.input, model.head_dim);
  if (weight_count != model.weights.param_count()) {
    throw DataError("'" + path + "': expected " +
                    std::to_string(model.weights.param_count()) +
                    " weights, file declares " + std::to_string(weight_count));
  }
  Vec flat;
  flat.reserve(weight_count);
  for (std::size_t k = 0; k < weight_count; ++k) {
    if (!(in >> token)) {
      throw DataError("'" + path + "': truncated weight block");
    }
    flat.push_back(parse_hex(token, path));
  }
  model.weights.assign_flat(flat);
  if (!model.weights.all_finite()) {
    throw DataError("'" + path + "': non-finite weights");
  }
  return model;
}

}  // namespace tailvar
