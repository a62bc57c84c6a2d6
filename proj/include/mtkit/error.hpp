#pragma once

#include <stdexcept>
#include <string>

namespace mtkit {

// Error codes shared across the toolkit. Validation/data errors map to CLI
// exit code 1, I/O and external-contract errors to exit code 2.
enum class Errc {
  empty_surface,
  empty_feature,
  separator_collision,
  malformed_pair,
  line_count_mismatch,
  empty_corpus,
  ragged_features,
  reserved_tag_collision,
  unbalanced_parens,
  missing_surface,
  missing_category,
  missing_field,
  length_mismatch,
  empty_node,
  overlapping_spans,
  span_out_of_bounds,
  dimension_mismatch,
  sidecar_mismatch,
  empty_reference,
  bad_format,
  bad_config,
  io_failure,
  translator_line_mismatch,
  translator_timeout,
};

const char* errc_name(Errc code) noexcept;

// Contract/I-O failures (exit code 2) vs. data validation failures (1).
bool is_contract_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& message);

}  // namespace mtkit
