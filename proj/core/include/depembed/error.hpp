#pragma once

#include <stdexcept>
#include <string>

namespace depembed {

enum class Errc {
  // name normalization / requirements parsing
  empty_name,
  invalid_name,
  // corpus
  missing_root,
  malformed_layout,
  malformed_record,
  duplicate_snapshot,
  empty_corpus,
  empty_scope,
  // embeddings
  rank_too_large,
  empty_matrix,
  unknown_libraries,
  zero_vector,
  version_mismatch,
  malformed_model,
  // clustering
  too_few_points,
  invalid_refs,
  too_few_items,
  // recommendation
  empty_slice,
  both_empty,
  no_candidates,
  // benchmark
  empty_targets,
  no_consecutive_pairs,
  // command line
  usage,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace depembed
