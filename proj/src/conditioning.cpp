#include "twinbeam/conditioning.hpp"

#include <cmath>

#include "twinbeam/rng.hpp"

namespace twinbeam {

namespace {

struct WindowStats {
  Window window;
  double control_sd = 0.0;
  double control_center = 0.0;
};

double control_value(const PulseRecord& r, int control_channel) {
  return control_channel == 2 ? r.s2 : r.s1;
}

double target_value(const PulseRecord& r, int control_channel) {
  return control_channel == 2 ? r.s1 : r.s2;
}

WindowStats compute_window(const ResampleView& view, const ConditioningSpec& spec) {
  ChannelMoments m;
  const std::size_t n = view.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PulseRecord& r = view.record(i);
    m.add(r.s1, r.s2);
  }
  WindowStats ws;
  ws.control_sd = std::sqrt(m.var(spec.control_channel));
  switch (spec.center.kind) {
    case WindowCenter::Kind::control_mean:
      ws.control_center = m.mean(spec.control_channel);
      break;
    case WindowCenter::Kind::absolute:
      ws.control_center = spec.center.value;
      break;
    case WindowCenter::Kind::offset_in_sd:
      ws.control_center = m.mean(spec.control_channel) + spec.center.value * ws.control_sd;
      break;
  }
  const double half_width = ws.control_sd / spec.q;
  ws.window = {ws.control_center - half_width, ws.control_center + half_width};
  return ws;
}

struct SubsetStats {
  std::int64_t n_selected = 0;
  double target_mean = 0.0;
  double target_var = 0.0;
};

// Boundaries inclusive.
SubsetStats subset_stats(const ResampleView& view, const Window& w, int control_channel) {
  Moments m;
  const std::size_t n = view.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PulseRecord& r = view.record(i);
    const double c = control_value(r, control_channel);
    if (c >= w.lo && c <= w.hi) m.add(target_value(r, control_channel));
  }
  SubsetStats out;
  out.n_selected = m.count;
  if (m.count >= 2) {
    out.target_mean = m.mean;
    out.target_var = m.variance();
  } else if (m.count == 1) {
    out.target_mean = m.mean;
  }
  return out;
}

}  // namespace

const char* to_string(WindowCenter::Kind kind) noexcept {
  switch (kind) {
    case WindowCenter::Kind::control_mean: return "control_mean";
    case WindowCenter::Kind::absolute: return "absolute";
    case WindowCenter::Kind::offset_in_sd: return "offset_in_sd";
  }
  return "unknown";
}

void ConditioningSpec::validate() const {
  if (!(q > 0.0) || !std::isfinite(q))
    throw ValidationError("conditioning.q", "must be finite and > 0");
  if (!std::isfinite(center.value))
    throw ValidationError("conditioning.center", "must be finite");
  if (control_channel != 1 && control_channel != 2)
    throw ValidationError("conditioning.control_channel", "must be 1 or 2");
}

Selection select(const Dataset& ds, const ConditioningSpec& spec) {
  spec.validate();
  if (ds.records.size() < 2)
    throw ValidationError("dataset", "conditioning needs at least 2 records");

  const WindowStats ws = compute_window(ResampleView{&ds, {}}, spec);

  Selection sel;
  sel.window = ws.window;
  sel.control_sd = ws.control_sd;
  sel.control_center = ws.control_center;
  sel.subset.kind = ds.kind;
  sel.subset.source = ds.source;
  sel.subset.coherent = ds.coherent;
  sel.subset.detector1 = ds.detector1;
  sel.subset.detector2 = ds.detector2;
  sel.subset.seed = ds.seed;
  for (const PulseRecord& r : ds.records) {
    const double c = control_value(r, spec.control_channel);
    if (c >= ws.window.lo && c <= ws.window.hi) sel.subset.records.push_back(r);
  }
  if (sel.subset.records.empty())
    throw AnalysisError("selection window [" + std::to_string(ws.window.lo) + ", " +
                        std::to_string(ws.window.hi) +
                        "] selected no pulses; Q may be too large or the center too far "
                        "in the tail");
  sel.success_rate =
      static_cast<double>(sel.subset.records.size()) / static_cast<double>(ds.records.size());
  return sel;
}

ConditionalResult conditional_fano(const Dataset& ds, const ConditioningSpec& spec,
                                   const Dataset* dark_target, const BootstrapSpec& bspec) {
  const Selection sel = select(ds, spec);
  const std::int64_t n_sel = static_cast<std::int64_t>(sel.subset.records.size());
  if (n_sel < kMinSelectedPulses)
    throw AnalysisError("selection kept only " + std::to_string(n_sel) + " pulses; at least " +
                        std::to_string(kMinSelectedPulses) +
                        " are required for a conditional Fano factor");

  const int target = spec.target_channel();

  // outputs: {fano, heralded mean}
  auto compute = [&spec, target](std::span<const ResampleView> views, std::span<double> out,
                                 bool check) {
    const WindowStats ws = compute_window(views[0], spec);
    const SubsetStats ss = subset_stats(views[0], ws.window, spec.control_channel);
    if (check && ss.n_selected < kMinSelectedPulses)
      throw AnalysisError("selection too small");
    double var = ss.target_var;
    double mean = ss.target_mean;
    if (views.size() > 1) {
      const ChannelMoments d = channel_moments(views[1]);
      var -= d.var(target);
      mean -= d.mean(target);
    }
    if (check && !(mean > 0.0))
      throw AnalysisError("conditional Fano undefined: corrected mean is not positive");
    out[0] = var / mean;
    out[1] = mean;
  };

  std::vector<const Dataset*> data{&ds};
  std::vector<ResampleView> identity{{&ds, {}}};
  if (dark_target != nullptr) {
    data.push_back(dark_target);
    identity.push_back({dark_target, {}});
  }

  double point[2];
  compute(identity, point, true);

  const std::vector<double> errs = bootstrap_errors(
      [&compute](std::span<const ResampleView> views, std::span<double> out) {
        compute(views, out, false);
      },
      data, 2, bspec.resamples, bspec.seed, bspec.max_workers);

  ConditionalResult res;
  res.fano_target = {point[0], errs[0], n_sel};
  res.mean_target = {point[1], errs[1], n_sel};
  res.success_rate = sel.success_rate;
  res.n_selected = n_sel;
  res.window = sel.window;
  return res;
}

double theoretical_conditional_fano(double f1, double f2, double nrf) {
  if (!(f2 > 0.0)) throw ValidationError("f2", "must be > 0");
  const double num = f1 + f2 - 2.0 * nrf;
  return f1 - num * num / (4.0 * f2);
}

namespace {

std::vector<SweepPoint> run_sweep(const Dataset& ds, std::span<const double> xs,
                                  const Dataset* dark_target, const BootstrapSpec& bspec,
                                  const std::function<ConditioningSpec(double)>& make_spec) {
  std::vector<SweepPoint> points;
  points.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    SweepPoint pt;
    pt.x = xs[i];
    BootstrapSpec point_spec = bspec;
    point_spec.seed = derive_seed(bspec.seed, i);
    try {
      pt.result = conditional_fano(ds, make_spec(xs[i]), dark_target, point_spec);
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    points.push_back(std::move(pt));
  }
  return points;
}

}  // namespace

std::vector<SweepPoint> sweep_q(const Dataset& ds, std::span<const double> q_values,
                                const Dataset* dark_target, const BootstrapSpec& bspec) {
  if (q_values.empty()) throw ValidationError("q_values", "must be nonempty");
  return run_sweep(ds, q_values, dark_target, bspec, [](double q) {
    ConditioningSpec spec;
    spec.q = q;
    spec.center = WindowCenter::mean();
    return spec;
  });
}

std::vector<SweepPoint> sweep_center(const Dataset& ds, std::span<const double> deltas_in_sd,
                                     double q, const Dataset* dark_target,
                                     const BootstrapSpec& bspec) {
  if (deltas_in_sd.empty()) throw ValidationError("deltas_in_sd", "must be nonempty");
  if (!(q > 0.0)) throw ValidationError("q", "must be > 0");
  return run_sweep(ds, deltas_in_sd, dark_target, bspec, [q](double delta) {
    ConditioningSpec spec;
    spec.q = q;
    spec.center = WindowCenter::offset(delta);
    return spec;
  });
}

}  // namespace twinbeam
