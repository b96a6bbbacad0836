#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tailvar/htqf.hpp"
#include "tailvar/linalg.hpp"
#include "tailvar/prng.hpp"

namespace tailvar {

enum class HeadKind { htqf, tqr };

// How the tanh head output is turned into usable quantities.  `bounded` is
// the default affine map that lands every output inside the valid HTQF
// region (or scales TQR quantiles by c_q); `identity` passes the tanh values
// through untouched for comparison runs, at the cost of possibly invalid
// parameters.
enum class HeadMapKind { bounded, identity };

struct HeadBounds {
  double c_mu = 2.0;
  double sigma_min = 1e-3;
  double sigma_max = 3.0;
  double u_max = 2.0;
  double v_max = 2.0;
  double c_q = 5.0;
  HeadMapKind map = HeadMapKind::bounded;
  double A = HtqfParams::kDefaultA;  // travels with the model file
};

// All trainable parameters.  Gate weights act on the 4 input features,
// recurrences on the hidden state, and the head projects h_L to the output.
//
// The canonical flat order (used by flatten/assign_flat, the optimizer, and
// the model file) is: w_f, w_i, w_o, w_g, u_f, u_i, u_o, u_g (row-major),
// then b_f, b_i, b_o, b_g, then w_out row-major, then b_out.
struct LstmWeights {
  Matrix w_f, w_i, w_o, w_g;  // hidden x input
  Matrix u_f, u_i, u_o, u_g;  // hidden x hidden
  Vec b_f, b_i, b_o, b_g;     // hidden
  Matrix w_out;               // head_dim x hidden
  Vec b_out;                  // head_dim

  static LstmWeights shaped(std::size_t hidden, std::size_t input,
                            std::size_t head_dim);

  std::size_t param_count() const;
  Vec flatten() const;
  void assign_flat(std::span<const double> flat);

  void add_scaled(const LstmWeights& other, double factor);  // *this += f*o
  void scale(double factor);
  double squared_norm() const;
  bool all_finite() const;

  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
};

struct LstmModel {
  std::size_t hidden = 0;
  std::size_t input = 4;
  HeadKind head_kind = HeadKind::htqf;
  std::size_t head_dim = 4;
  std::size_t window_len = 0;  // L used in training; 0 = not recorded
  HeadBounds bounds;
  LstmWeights weights;
};

// Fresh model with gate, recurrence and head weights drawn uniformly from
// [-1/sqrt(H), 1/sqrt(H)] in canonical flat order, forget bias 1, other
// biases 0.  head_dim must be 4 for the htqf head.
LstmModel lstm_init(std::size_t hidden, HeadKind head_kind,
                    std::size_t head_dim, Prng& rng,
                    const HeadBounds& bounds = {});

// Everything the backward pass needs, captured step by step.
struct ForwardTrace {
  std::size_t steps = 0;
  Matrix x;                          // steps x input
  Matrix f, i, o, g, c, tanh_c, h;   // steps x hidden each
  Vec head_raw;                      // w_out h_L + b_out
  Vec head_tanh;                     // tanh of the above
  Vec output;                        // after the head map
};

// Runs the six cell recurrences over the window rows (oldest first) from
// c_0 = h_0 = 0, applies the head, and returns the mapped output
// ([mu, sigma, u, v] for htqf; K quantities for tqr).  Pass `trace` to keep
// intermediate state for lstm_backward; its buffers are reused when already
// correctly sized.
Vec lstm_forward(const LstmModel& model, const Matrix& window,
                 ForwardTrace* trace = nullptr);

// Head maps applied to the tanh output (each component in (-1, 1)):
//   mu = c_mu * a1, sigma = sigma_min + (sigma_max - sigma_min)(a2 + 1)/2,
//   u = u_max (a3 + 1)/2, v = v_max (a4 + 1)/2      (htqf, bounded)
//   q_k = c_q * a_k                                  (tqr, bounded)
// The identity map returns the tanh values unchanged.
HtqfParams map_head_htqf(std::span<const double> head_tanh,
                         const HeadBounds& bounds);
Vec map_head_tqr(std::span<const double> head_tanh, const HeadBounds& bounds);

// Exact reverse-mode gradient of a scalar loss through the head map, the
// head, and the recurrences, given d(loss)/d(mapped output).  The trace must
// come from lstm_forward on the same model.
LstmWeights lstm_backward(const LstmModel& model, const ForwardTrace& trace,
                          std::span<const double> d_output);

// Same, accumulating into `grad` (the batch-reduction hot path).
void lstm_backward_into(const LstmModel& model, const ForwardTrace& trace,
                        std::span<const double> d_output, LstmWeights& grad);

// Versioned text serialization; weights are stored as C99 hexfloats in
// canonical flat order, so save -> load is bit-exact.  Throws DataError.
void save_model(const LstmModel& model, const std::string& path);
LstmModel load_model(const std::string& path);

}  // namespace tailvar
