#pragma once

// Structured-text record shared by the wire and file formats.
//
//   <type>\n
//   <key>:<byte-length>:<value>\n   (repeated, insertion order kept)
//
// Values are binary safe because of the length prefix.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace appraide {

class RecordError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Record {
public:
    Record() = default;
    explicit Record(std::string type) : type_(std::move(type)) {}

    const std::string& type() const { return type_; }
    const std::vector<std::pair<std::string, std::string>>& fields() const { return fields_; }

    Record& set(std::string key, std::string value);
    Record& set(std::string key, std::uint64_t value) { return set(std::move(key), std::to_string(value)); }

    bool has(std::string_view key) const;
    /// Throws RecordError when the key is absent.
    const std::string& get(std::string_view key) const;
    std::uint64_t get_u64(std::string_view key) const;
    /// All values stored under a repeated key, in order.
    std::vector<std::string> get_all(std::string_view key) const;
    Record& add(std::string key, std::string value);

    std::string encode() const;
    static Record decode(std::string_view text);

private:
    std::string type_;
    std::vector<std::pair<std::string, std::string>> fields_;
};

}  // namespace appraide
