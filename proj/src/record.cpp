#include "appraide/record.hpp"

#include <charconv>

namespace appraide {

Record& Record::set(std::string key, std::string value) {
    for (auto& [k, v] : fields_) {
        if (k == key) {
            v = std::move(value);
            return *this;
        }
    }
    fields_.emplace_back(std::move(key), std::move(value));
    return *this;
}

Record& Record::add(std::string key, std::string value) {
    fields_.emplace_back(std::move(key), std::move(value));
    return *this;
}

bool Record::has(std::string_view key) const {
    for (const auto& [k, v] : fields_) {
        if (k == key) {
            return true;
        }
    }
    return false;
}

const std::string& Record::get(std::string_view key) const {
    for (const auto& [k, v] : fields_) {
        if (k == key) {
            return v;
        }
    }
    throw RecordError("record '" + type_ + "' has no field '" + std::string(key) + "'");
}

std::uint64_t Record::get_u64(std::string_view key) const {
    const std::string& text = get(key);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw RecordError("field '" + std::string(key) + "' is not an unsigned integer");
    }
    return value;
}

std::vector<std::string> Record::get_all(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : fields_) {
        if (k == key) {
            out.push_back(v);
        }
    }
    return out;
}

std::string Record::encode() const {
    std::string out = type_;
    out.push_back('\n');
    for (const auto& [k, v] : fields_) {
        out += k;
        out.push_back(':');
        out += std::to_string(v.size());
        out.push_back(':');
        out += v;
        out.push_back('\n');
    }
    return out;
}

Record Record::decode(std::string_view text) {
    const auto type_end = text.find('\n');
    if (type_end == std::string_view::npos || type_end == 0) {
        throw RecordError("record has no type line");
    }
    Record record{std::string(text.substr(0, type_end))};
    std::size_t pos = type_end + 1;
    while (pos < text.size()) {
        const auto key_end = text.find(':', pos);
        if (key_end == std::string_view::npos) {
            throw RecordError("truncated record field");
        }
        const auto len_end = text.find(':', key_end + 1);
        if (len_end == std::string_view::npos) {
            throw RecordError("truncated record field length");
        }
        std::size_t length = 0;
        const auto [ptr, ec] = std::from_chars(text.data() + key_end + 1, text.data() + len_end, length);
        if (ec != std::errc() || ptr != text.data() + len_end) {
            throw RecordError("bad record field length");
        }
        const std::size_t value_start = len_end + 1;
        if (value_start + length >= text.size() || text[value_start + length] != '\n') {
            throw RecordError("record field overruns input");
        }
        record.fields_.emplace_back(std::string(text.substr(pos, key_end - pos)),
                                    std::string(text.substr(value_start, length)));
        pos = value_start + length + 1;
    }
    return record;
}

}  // namespace appraide
