#ifndef MIC_ERRORS_HPP
#define MIC_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mic {

enum class errc {
    parse,
    invariant,
    io,
    placement,
    double_declaration,
    missing_field,
    template_arity,
    empty_bank,
    rect_out_of_bounds,
    empty_plan,
    zero_count,
    manifest,
};

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::parse: return "parse";
    case errc::invariant: return "invariant";
    case errc::io: return "io";
    case errc::placement: return "placement";
    case errc::double_declaration: return "double_declaration";
    case errc::missing_field: return "missing_field";
    case errc::template_arity: return "template_arity";
    case errc::empty_bank: return "empty_bank";
    case errc::rect_out_of_bounds: return "rect_out_of_bounds";
    case errc::empty_plan: return "empty_plan";
    case errc::zero_count: return "zero_count";
    case errc::manifest: return "manifest";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

/// Malformed input; `byte_offset` points at the first offending byte when known.
class parse_error : public error {
public:
    parse_error(std::size_t byte_offset, const std::string& what)
        : error(errc::parse, what + " (byte " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

/// One failed validity check. `where` names the field or rule, `message` says how it failed.
struct violation {
    std::string where;
    std::string message;

    bool operator==(const violation&) const = default;
};

/// Raised when an operation requires a valid value and got one or more violations.
class invariant_error : public error {
public:
    explicit invariant_error(std::vector<violation> violations)
        : error(errc::invariant, summarize(violations)), violations_(std::move(violations)) {}

    invariant_error(errc code, const std::string& what) : error(code, what) {}

    const std::vector<violation>& violations() const noexcept { return violations_; }

private:
    static std::string summarize(const std::vector<violation>& vs) {
        if (vs.empty()) return "invariant violated";
        std::string s = vs.front().where + ": " + vs.front().message;
        if (vs.size() > 1) s += " (+" + std::to_string(vs.size() - 1) + " more)";
        return s;
    }

    std::vector<violation> violations_;
};

}  // namespace mic

#endif  // MIC_ERRORS_HPP
