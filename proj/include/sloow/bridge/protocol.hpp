#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace sloow::bridge {

inline constexpr std::size_t max_line_bytes = 64;  // including the LF
inline constexpr int protocol_version = 1;

enum class ErrorCode { range, parse, state };

struct Hello {
  int version = protocol_version;
  friend bool operator==(Hello, Hello) = default;
};
struct Set {
  int pct = 0;
  friend bool operator==(Set, Set) = default;
};
struct Get {
  friend bool operator==(Get, Get) = default;
};
struct Ok {
  int pct = 0;
  friend bool operator==(Ok, Ok) = default;
};
struct Err {
  ErrorCode code = ErrorCode::parse;
  friend bool operator==(Err, Err) = default;
};
struct Bye {
  friend bool operator==(Bye, Bye) = default;
};

using Message = std::variant<Hello, Set, Get, Ok, Err, Bye>;

// Why a line did not decode to a Message. `range` means well-formed but the
// percentage lies outside 0..100.
struct DecodeError {
  ErrorCode code = ErrorCode::parse;
  friend bool operator==(DecodeError, DecodeError) = default;
};

using Decoded = std::variant<Message, DecodeError>;

inline const char* code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::range: return "RANGE";
    case ErrorCode::parse: return "PARSE";
    case ErrorCode::state: return "STATE";
  }
  return "PARSE";
}

inline std::string encode(const Message& msg) {
  struct Visitor {
    std::string operator()(const Hello& m) const { return "HELLO v" + std::to_string(m.version) + "\n"; }
    std::string operator()(const Set& m) const { return "SET " + std::to_string(m.pct) + "\n"; }
    std::string operator()(const Get&) const { return "GET\n"; }
    std::string operator()(const Ok& m) const { return "OK " + std::to_string(m.pct) + "\n"; }
    std::string operator()(const Err& m) const { return std::string("ERR ") + code_name(m.code) + "\n"; }
    std::string operator()(const Bye&) const { return "BYE\n"; }
  };
  return std::visit(Visitor{}, msg);
}

namespace detail {

// Canonical unsigned decimal: digits only, no sign, no leading zeros.
inline bool parse_uint(std::string_view s, long long& out) {
  if (s.empty() || s.size() > 9) return false;
  if (s.size() > 1 && s.front() == '0') return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return true;
}

}  // namespace detail

/// Decodes one LF-terminated line (at most 64 bytes including the LF).
/// Grammar: `HELLO v<n>`, `SET <pct>`, `GET`, `OK <pct>`, `ERR <CODE>`, `BYE`;
/// ASCII with single-space separators. Never throws.
inline Decoded decode(std::string_view line) {
  constexpr DecodeError parse_error{ErrorCode::parse};
  if (line.size() > max_line_bytes || line.empty() || line.back() != '\n') return parse_error;
  line.remove_suffix(1);

  const auto space = line.find(' ');
  const std::string_view verb = line.substr(0, space);
  const bool has_arg = space != std::string_view::npos;
  const std::string_view arg = has_arg ? line.substr(space + 1) : std::string_view{};

  if (!has_arg) {
    if (verb == "GET") return Message{Get{}};
    if (verb == "BYE") return Message{Bye{}};
    return parse_error;
  }

  long long n = 0;
  if (verb == "HELLO") {
    if (arg.size() < 2 || arg.front() != 'v' || !detail::parse_uint(arg.substr(1), n)) return parse_error;
    return Message{Hello{static_cast<int>(n)}};
  }
  if (verb == "SET" || verb == "OK") {
    if (!detail::parse_uint(arg, n)) return parse_error;
    if (n > 100) return DecodeError{ErrorCode::range};
    if (verb == "SET") return Message{Set{static_cast<int>(n)}};
    return Message{Ok{static_cast<int>(n)}};
  }
  if (verb == "ERR") {
    if (arg == "RANGE") return Message{Err{ErrorCode::range}};
    if (arg == "PARSE") return Message{Err{ErrorCode::parse}};
    if (arg == "STATE") return Message{Err{ErrorCode::state}};
  }
  return parse_error;
}

}  // namespace sloow::bridge
