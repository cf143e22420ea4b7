#include "jam/kv.hpp"

#include <charconv>
#include <cmath>

namespace jam {
namespace {

bool valid_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
        if (!ok) return false;
    }
    return true;
}

bool valid_value(std::string_view value) {
    return value.find('\n') == std::string_view::npos && value.find('\r') == std::string_view::npos;
}

template <class T>
T parse_integral(std::string_view s, const char* what) {
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw KvError(std::string("malformed ") + what + ": '" + std::string(s) + "'");
    }
    return value;
}

}  // namespace

void KvDocument::set(std::string key, std::string value) {
    if (!valid_key(key)) throw KvError("invalid key: '" + key + "'");
    if (!valid_value(value)) throw KvError("value for '" + key + "' contains a line break");
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::move(key), std::move(value));
}

void KvDocument::set(std::string key, std::int64_t value) { set(std::move(key), std::to_string(value)); }
void KvDocument::set(std::string key, std::uint64_t value) { set(std::move(key), std::to_string(value)); }
void KvDocument::set(std::string key, double value) { set(std::move(key), format_double(value)); }
void KvDocument::set(std::string key, bool value) { set(std::move(key), std::string(value ? "1" : "0")); }

const std::string* KvDocument::find(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return &v;
    }
    return nullptr;
}

const std::string& KvDocument::at(std::string_view key) const {
    if (const auto* v = find(key)) return *v;
    throw KvError("missing key: '" + std::string(key) + "'");
}

std::string KvDocument::serialize() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

KvDocument KvDocument::parse(std::string_view text) {
    KvDocument doc;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        ++line_no;
        const std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            throw KvError("line " + std::to_string(line_no) + " is not newline-terminated");
        }
        const std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw KvError("line " + std::to_string(line_no) + " has no '='");
        }
        std::string key(line.substr(0, eq));
        if (doc.contains(key)) throw KvError("duplicate key: '" + key + "'");
        doc.set(std::move(key), std::string(line.substr(eq + 1)));
    }
    return doc;
}

std::string format_double(double v) {
    if (!std::isfinite(v)) throw KvError("cannot format a non-finite number");
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw KvError("number formatting failed");
    return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
        throw KvError("malformed number: '" + std::string(s) + "'");
    }
    return value;
}

std::int64_t parse_int(std::string_view s) { return parse_integral<std::int64_t>(s, "integer"); }
std::uint64_t parse_uint(std::string_view s) { return parse_integral<std::uint64_t>(s, "unsigned integer"); }

bool parse_bool(std::string_view s) {
    if (s == "1") return true;
    if (s == "0") return false;
    throw KvError("malformed flag: '" + std::string(s) + "'");
}

std::vector<std::string_view> split_fields(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    if (s.empty()) return out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::string join_fields(const std::vector<std::string>& fields, char sep) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out += sep;
        out += fields[i];
    }
    return out;
}

std::string encode_frame(std::string_view body) {
    std::string out = std::to_string(body.size());
    out += '\n';
    out.append(body);
    return out;
}

std::optional<std::string> FrameDecoder::next() {
    const std::size_t eol = buffer_.find('\n');
    if (eol == std::string::npos) {
        if (buffer_.size() > 20) throw KvError("frame length prefix too long");
        return std::nullopt;
    }
    const std::string_view prefix(buffer_.data(), eol);
    if (prefix.empty() || prefix.size() > 20 || (prefix.size() > 1 && prefix.front() == '0')) {
        throw KvError("malformed frame length prefix");
    }
    const auto length = parse_integral<std::uint64_t>(prefix, "frame length");
    if (length > max_body_) throw KvError("frame exceeds size limit");
    if (buffer_.size() - eol - 1 < length) return std::nullopt;
    std::string body = buffer_.substr(eol + 1, static_cast<std::size_t>(length));
    buffer_.erase(0, eol + 1 + static_cast<std::size_t>(length));
    return body;
}

}  // namespace jam
