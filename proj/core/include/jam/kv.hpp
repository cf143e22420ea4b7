#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace jam {

class KvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat, ordered key=value document, one entry per line. Keys are
/// [a-z0-9_.]+; values are any text without CR/LF. Serialization is
/// byte-stable: entries are written in insertion order.
class KvDocument {
public:
    void set(std::string key, std::string value);
    void set(std::string key, std::int64_t value);
    void set(std::string key, std::uint64_t value);
    void set(std::string key, double value);
    void set(std::string key, bool value);

    const std::string* find(std::string_view key) const;
    /// Throws KvError when the key is absent.
    const std::string& at(std::string_view key) const;
    bool contains(std::string_view key) const { return find(key) != nullptr; }

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::string serialize() const;
    /// Throws KvError on malformed lines or duplicate keys.
    static KvDocument parse(std::string_view text);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Strict scalar codecs shared by the wire and session formats. All throw
// KvError on malformed input.
std::string format_double(double v);
double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);
std::uint64_t parse_uint(std::string_view s);
bool parse_bool(std::string_view s);

/// Space-separated fields; empty input yields no fields.
std::vector<std::string_view> split_fields(std::string_view s, char sep = ' ');
std::string join_fields(const std::vector<std::string>& fields, char sep = ' ');

/// Length-prefixed framing: "<decimal byte count>\n<body>".
std::string encode_frame(std::string_view body);

/// Incremental decoder for a byte stream of frames.
class FrameDecoder {
public:
    explicit FrameDecoder(std::size_t max_body = std::size_t{64} << 20) : max_body_(max_body) {}

    void feed(std::string_view bytes) { buffer_.append(bytes); }
    /// Next complete body, if buffered. Throws KvError on a malformed or
    /// oversized prefix.
    std::optional<std::string> next();
    std::size_t buffered() const { return buffer_.size(); }

private:
    std::string buffer_;
    std::size_t max_body_;
};

}  // namespace jam
