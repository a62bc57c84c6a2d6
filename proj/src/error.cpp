#include "mtkit/error.hpp"

namespace mtkit {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::empty_surface: return "EmptySurface";
    case Errc::empty_feature: return "EmptyFeature";
    case Errc::separator_collision: return "SeparatorCollision";
    case Errc::malformed_pair: return "MalformedPair";
    case Errc::line_count_mismatch: return "LineCountMismatch";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::ragged_features: return "RaggedFeatures";
    case Errc::reserved_tag_collision: return "ReservedTagCollision";
    case Errc::unbalanced_parens: return "UnbalancedParens";
    case Errc::missing_surface: return "MissingSurface";
    case Errc::missing_category: return "MissingCategory";
    case Errc::missing_field: return "MissingField";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_node: return "EmptyNode";
    case Errc::overlapping_spans: return "OverlappingSpans";
    case Errc::span_out_of_bounds: return "SpanOutOfBounds";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::sidecar_mismatch: return "SidecarMismatch";
    case Errc::empty_reference: return "EmptyReference";
    case Errc::bad_format: return "BadFormat";
    case Errc::bad_config: return "BadConfig";
    case Errc::io_failure: return "IoFailure";
    case Errc::translator_line_mismatch: return "TranslatorLineMismatch";
    case Errc::translator_timeout: return "TranslatorTimeout";
  }
  return "UnknownError";
}

bool is_contract_error(Errc code) noexcept {
  switch (code) {
    case Errc::io_failure:
    case Errc::translator_line_mismatch:
    case Errc::translator_timeout:
      return true;
    default:
      return false;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

void raise(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace mtkit
