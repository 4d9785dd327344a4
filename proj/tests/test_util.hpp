#pragma once

// Shared helpers for the test suite: fixture/corpus paths and loaders.

#include <string>

#include "meic/bundle.hpp"
#include "meic/common.hpp"
#include "meic/tool/testbench.hpp"
#include "meic/tool/vectors.hpp"

#ifndef MEIC_FIXTURE_DIR
#define MEIC_FIXTURE_DIR "tests/fixtures"
#endif
#ifndef MEIC_CORPUS_DIR
#define MEIC_CORPUS_DIR "corpus"
#endif

namespace meic_test {

inline std::string fixture_path(const std::string& rel) {
  return std::string(MEIC_FIXTURE_DIR) + "/" + rel;
}

inline std::string corpus_path(const std::string& rel) {
  return std::string(MEIC_CORPUS_DIR) + "/" + rel;
}

inline const std::vector<std::string>& corpus_designs() {
  static const std::vector<std::string> names = {
      "adder8", "rca4", "shifter", "popcount8", "alu8", "mux2", "parity", "comparator"};
  return names;
}

inline std::string corpus_source(const std::string& design) {
  return meic::read_file(corpus_path(design + "/design.v"));
}

inline meic::tool::VectorTable corpus_table(const std::string& design) {
  auto json = meic::tool::Json::parse(meic::read_file(corpus_path(design + "/vectors.json")));
  return meic::tool::vector_table_from_json(json);
}

inline meic::DesignBundle corpus_bundle(const std::string& design) {
  meic::DesignBundle b;
  b.rtl_source = corpus_source(design);
  b.spec_text = meic::read_file(corpus_path(design + "/spec.md"));
  b.testbench_source = meic::tool::generate_testbench(corpus_table(design));
  return b;
}

inline meic::DesignMeta corpus_meta(const std::string& design) {
  auto j = meic::tool::Json::parse(meic::read_file(corpus_path(design + "/design.json")));
  meic::DesignMeta meta;
  meta.design_id = j.at("design_id").get<std::string>();
  meta.module_type = meic::module_type_from_string(j.at("module_type").get<std::string>());
  return meta;
}

}  // namespace meic_test
