#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coaccess {

/// Input text that violates one of the on-disk formats. Carries the
/// 1-based line number of the offending record (0 when unknown).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line_no, const std::string& reason)
      : std::runtime_error(line_no == 0
                               ? reason
                               : "line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no),
        reason_(reason) {}

  std::size_t line_no() const { return line_no_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_no_;
  std::string reason_;
};

/// A caller broke an operation's stated precondition (unsorted input,
/// index kind mismatch, infeasible configuration, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Debiasing or age binning needs a publication date that the metadata
/// set does not provide.
class MissingMetadataError : public std::runtime_error {
 public:
  explicit MissingMetadataError(const std::string& doc_id)
      : std::runtime_error("no metadata for document '" + doc_id + "'"),
        doc_id_(doc_id) {}

  const std::string& doc_id() const { return doc_id_; }

 private:
  std::string doc_id_;
};

}  // namespace coaccess
