#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mbti/util/error.hpp"

namespace mbti {

class CsvError : public FormatError {
 public:
  CsvError(const std::string& what, std::size_t record) : FormatError(what), record_(record) {}
  std::size_t record() const { return record_; }  // 1-based record number

 private:
  std::size_t record_;
};

// RFC 4180: quoted fields may contain commas, newlines and doubled quotes.
// Accepts both \n and \r\n line endings. Throws CsvError on a quote opened
// but never closed, or on stray data after a closing quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

std::string csv_quote(std::string_view field);
std::string csv_join(const std::vector<std::string>& fields);

}  // namespace mbti
