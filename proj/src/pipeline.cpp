#include "relfuse/pipeline.hpp"

#include <future>

namespace relfuse {

namespace {

class Fitter {
 public:
  Fitter(const SystemSpec& spec, const SampleMap& data, const PriorMap& priors,
         const FitOptions& options)
      : spec_(spec), data_(data), priors_(priors), options_(options) {}

  // Fits the subtree and appends labelled node fits and warnings to `out`.
  BetaStacyProcess fit(const RbdNode& node, FitResult& out) const {
    const std::string& label = node.binding_name();
    BetaStacyProcess prior;
    if (!node.is_component()) {
      std::vector<std::future<std::pair<BetaStacyProcess, FitResult>>> pending;
      pending.reserve(node.children.size());
      for (const auto& child : node.children) {
        pending.push_back(std::async(std::launch::async, [this, &child] {
          FitResult partial;
          BetaStacyProcess post = fit(child, partial);
          return std::make_pair(std::move(post), std::move(partial));
        }));
      }
      std::vector<MomentCurve> curves;
      for (auto& f : pending) {
        auto [post, partial] = f.get();
        curves.push_back(moments_of(post));
        append(out, std::move(partial));
      }
      prior = recover_precision(fold_group(node.kind, curves), options_.fusion, &out.warnings);
      if (const BetaStacyProcess* elicited = find_prior(label)) {
        prior = merge_priors(prior, *elicited, options_.fusion, &out.warnings);
      }
    } else if (const BetaStacyProcess* elicited = find_prior(label)) {
      prior = *elicited;
    }

    BetaStacyProcess posterior = prior;
    if (const auto* samples = find_data(label); samples != nullptr && !samples->empty()) {
      posterior = posterior_update(prior, *samples);
    }
    if (!label.empty()) out.nodes.push_back({label, prior, posterior});
    return posterior;
  }

  BetaStacyProcess fit_root_only(FitResult& out) const {
    const std::string& label = spec_.root.binding_name();
    BetaStacyProcess prior;
    if (const BetaStacyProcess* elicited = find_prior(label)) prior = *elicited;
    BetaStacyProcess posterior = prior;
    if (const auto* samples = find_data(label); samples != nullptr && !samples->empty()) {
      posterior = posterior_update(prior, *samples);
    }
    if (!label.empty()) out.nodes.push_back({label, prior, posterior});
    return posterior;
  }

 private:
  static void append(FitResult& into, FitResult&& from) {
    for (auto& n : from.nodes) into.nodes.push_back(std::move(n));
    for (auto& w : from.warnings) into.warnings.push_back(std::move(w));
  }

  const std::vector<LifetimeSample>* find_data(const std::string& label) const {
    if (label.empty()) return nullptr;
    std::string name = label;
    if (!spec_.data_bindings.empty()) {
      const auto b = spec_.data_bindings.find(label);
      if (b == spec_.data_bindings.end()) return nullptr;
      name = b->second;
    }
    const auto it = data_.find(name);
    return it == data_.end() ? nullptr : &it->second;
  }

  const BetaStacyProcess* find_prior(const std::string& label) const {
    if (label.empty()) return nullptr;
    std::string name = label;
    if (!spec_.prior_bindings.empty()) {
      const auto b = spec_.prior_bindings.find(label);
      if (b == spec_.prior_bindings.end()) return nullptr;
      name = b->second;
    }
    const auto it = priors_.find(name);
    return it == priors_.end() ? nullptr : &it->second;
  }

  const SystemSpec& spec_;
  const SampleMap& data_;
  const PriorMap& priors_;
  const FitOptions& options_;
};

}  // namespace

FitResult fit_system(const SystemSpec& spec, const SampleMap& data, const PriorMap& priors,
                     const FitOptions& options) {
  Fitter fitter(spec, data, priors, options);
  FitResult out;
  out.system = options.system_only ? fitter.fit_root_only(out) : fitter.fit(spec.root, out);
  return out;
}

}  // namespace relfuse
