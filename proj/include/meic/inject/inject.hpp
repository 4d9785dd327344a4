#pragma once

// Seeded error injection: choose one applicable site for a category and
// produce the buggy source together with enough provenance to undo it.

#include <cstdint>
#include <string>
#include <string_view>

#include "meic/common.hpp"
#include "meic/inject/category.hpp"
#include "meic/inject/sites.hpp"
#include "meic/rng.hpp"

namespace meic::inject {

struct ErrorInstance {
  std::string instance_id;
  std::string design_id;
  ErrorCategory category = ErrorCategory::PrematureTermination;
  std::string mutated_source;    // the buggy code handed to the pipeline
  std::string reference_source;  // the clean code it was derived from
  InjectionSite site;
  uint64_t seed = 0;
};

namespace inject_detail {

inline std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

inline ErrorInstance make_instance(std::string_view reference, ErrorCategory category,
                                   InjectionSite site, uint64_t seed,
                                   std::string design_id, std::string instance_id) {
  ErrorInstance inst;
  inst.category = category;
  inst.reference_source.assign(reference);
  inst.mutated_source = apply_site(reference, site);
  inst.site = std::move(site);
  inst.seed = seed;
  inst.design_id = std::move(design_id);
  inst.instance_id = std::move(instance_id);
  if (inst.instance_id.empty())
    inst.instance_id = "inst-" + to_string(category) + "-" + hex64(seed);
  return inst;
}

}  // namespace inject_detail

// Applies `category` to `reference_source` at a site chosen uniformly by a
// splitmix64 stream seeded with `seed`. Same (source, category, seed) in,
// byte-identical instance out. Throws when the category has no site here.
inline ErrorInstance inject(std::string_view reference_source, ErrorCategory category,
                            uint64_t seed, std::string design_id = "",
                            std::string instance_id = "") {
  std::vector<InjectionSite> sites = list_sites(reference_source, category);
  if (sites.empty())
    throw Error("no applicable site for category '" + to_string(category) + "'");
  SplitMix64 rng(seed);
  size_t pick = static_cast<size_t>(rng.pick(sites.size()));
  return inject_detail::make_instance(reference_source, category, std::move(sites[pick]),
                                      seed, std::move(design_id), std::move(instance_id));
}

}  // namespace meic::inject
