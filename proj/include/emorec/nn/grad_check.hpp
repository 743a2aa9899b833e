#pragma once

#include "emorec/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace emorec::nn {

struct GradCheckOptions {
  double epsilon = 1e-3;
  /// Checks at most this many evenly strided entries per parameter tensor;
  /// 0 checks every entry.
  Index max_entries_per_tensor = 0;
  /// When a perturbation flips a relu sign or a max-pool winner, the central
  /// difference straddles a kink. Retry with epsilon shrunk by this factor,
  /// at most `kink_retries` times; 0 retries disables kink tracking.
  double kink_shrink = 100.0;
  int kink_retries = 2;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  Index entries_checked = 0;
  /// Entries whose difference at `epsilon` crossed a kink and were
  /// re-measured at a smaller step.
  Index kink_retried = 0;
  /// Entries still crossing a kink at the smallest step; not scored.
  Index kink_excluded = 0;
  int worst_layer = -1;
  int worst_tensor = -1;
  Index worst_entry = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// The piecewise-linear branch taken by every relu unit and every max-pool
/// window for `input`. Equal patterns mean the loss is smooth between the
/// two parameter points.
template <typename Scalar>
std::vector<std::int64_t> activation_pattern(const Model<Scalar>& model, const std::vector<Tensor<Scalar>>& acts) {
  std::vector<std::int64_t> pattern;
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    const auto& spec = model.layers()[i];
    const auto& in = acts[i];
    const auto& out = acts[i + 1];
    switch (spec.kind) {
      case LayerKind::Relu:
        for (Index k = 0; k < in.size(); ++k) pattern.push_back(in[k] > Scalar(0));
        break;
      case LayerKind::MaxPool2d: {
        const Index w = in.shape()[1], c = in.shape()[2], p = spec.window;
        const Index oh = in.shape()[0] / p, ow = w / p;
        for (Index oy = 0; oy < oh; ++oy)
          for (Index ox = 0; ox < ow; ++ox)
            for (Index ch = 0; ch < c; ++ch) {
              const Index o = (oy * ow + ox) * c + ch;
              std::int64_t winner = -1;
              for (Index d = 0; d < p * p && winner < 0; ++d) {
                if (in[((oy * p + d / p) * w + ox * p + d % p) * c + ch] == out[o]) winner = d;
              }
              pattern.push_back(winner);
            }
        break;
      }
      case LayerKind::GlobalMaxPool: {
        const Index t_len = in.shape()[0], c = in.shape()[1];
        for (Index ch = 0; ch < c; ++ch) {
          std::int64_t winner = -1;
          for (Index t = 0; t < t_len && winner < 0; ++t) {
            if (in[t * c + ch] == out[ch]) winner = t;
          }
          pattern.push_back(winner);
        }
        break;
      }
      default: break;
    }
  }
  return pattern;
}

template <typename Scalar>
std::vector<std::int64_t> activation_pattern(const Model<Scalar>& model, const Tensor<Scalar>& input) {
  return activation_pattern(model, model.trace(input));
}

/// Compares backward() against central differences of the cross-entropy
/// loss. Relative error per entry is |a - n| / max(|a|, |n|, 1e-8).
/// Runs in double precision; float models are promoted first.
inline GradCheckReport grad_check_report(const Model<double>& model, const Tensor<double>& input,
                                         Index true_class, const GradCheckOptions& options = {}) {
  if (!(options.epsilon > 0.0)) throw Error(Errc::InvalidArgument, "epsilon must be > 0");
  const auto analytic = backward(model, input, true_class);
  const bool track_kinks = options.kink_retries > 0;
  const auto base_pattern = track_kinks ? activation_pattern(model, input) : std::vector<std::int64_t>{};

  Model<double> probe = model;
  GradCheckReport report;
  auto& params = probe.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      auto& tensor = params[i][j];
      const Index n = tensor.size();
      const Index count =
          options.max_entries_per_tensor > 0 ? std::min(n, options.max_entries_per_tensor) : n;
      for (Index k = 0; k < count; ++k) {
        const Index e = count == n ? k : k * n / count;
        const double saved = tensor[e];
        double eps = options.epsilon;
        double numeric = 0.0;
        bool smooth = false;
        for (int attempt = 0; attempt <= std::max(options.kink_retries, 0); ++attempt) {
          const auto evaluate = [&](double value, bool& same_branch) {
            tensor[e] = value;
            if (!track_kinks) return loss_cross_entropy(probe.forward(input), true_class);
            const auto acts = probe.trace(input);
            same_branch = same_branch && activation_pattern(probe, acts) == base_pattern;
            return loss_cross_entropy(acts.back(), true_class);
          };
          smooth = true;
          const double up = evaluate(saved + eps, smooth);
          const double down = evaluate(saved - eps, smooth);
          tensor[e] = saved;
          numeric = (up - down) / (2.0 * eps);
          if (smooth) break;
          if (attempt == 0) ++report.kink_retried;
          eps /= options.kink_shrink;
        }
        ++report.entries_checked;
        if (!smooth) {
          ++report.kink_excluded;
          continue;
        }
        const double a = analytic[i][j][e];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
        if (rel > report.max_relative_error) {
          report.max_relative_error = rel;
          report.worst_layer = static_cast<int>(i);
          report.worst_tensor = static_cast<int>(j);
          report.worst_entry = e;
          report.worst_analytic = a;
          report.worst_numeric = numeric;
        }
      }
    }
  }
  return report;
}

template <typename Scalar>
double grad_check(const Model<Scalar>& model, const Tensor<Scalar>& input, Index true_class, double epsilon,
                  Index max_entries_per_tensor = 0) {
  GradCheckOptions options;
  options.epsilon = epsilon;
  options.max_entries_per_tensor = max_entries_per_tensor;
  return grad_check_report(model.template cast<double>(), input.template cast<double>(), true_class, options)
      .max_relative_error;
}

}  // namespace emorec::nn
