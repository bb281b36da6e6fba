#pragma once

// Text format for immersions F: R^{2n} -> C^{2n}.
//
//   n = 1; ambient = flat; map = [u1, u2, -u2, u1]
//
// Components are interleaved real/imaginary parts (x1, y1, x2, y2, ...), so the
// ambient complex structure acts blockwise as (x, y) -> (-y, x).

#include "kangle/ambient_spec.hpp"
#include "kangle/errors.hpp"
#include "kangle/expr.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace kangle {

inline constexpr int kMaxHalfDim = 4;

class ParseError : public Error {
public:
    enum class Kind { syntax, arity, name };

    ParseError(Kind kind, SourcePos pos, std::vector<std::string> expected, const std::string& message);

    Kind kind() const { return kind_; }
    int line() const { return pos_.line; }
    int column() const { return pos_.column; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    Kind kind_;
    SourcePos pos_;
    std::vector<std::string> expected_;
};

struct ImmersionSpec {
    int n = 1;
    AmbientSpec ambient;
    std::vector<ExprPtr> components;
    std::string name;
    bool periodic = false;

    int domain_dim() const { return 2 * n; }
    int target_dim() const { return 4 * n; }
};

ImmersionSpec parse_immersion(std::string_view text, std::string name = {});
std::string print_immersion(const ImmersionSpec& spec);

/// Same n, ambient, periodic flag and component trees. Names are ignored.
bool structurally_equal(const ImmersionSpec& a, const ImmersionSpec& b);

/// The 4n component jets seeded at `point`. Rejects points whose image leaves
/// the chart of a negatively curved space form.
std::vector<Jet> eval_components(const ImmersionSpec& spec, std::span<const double> point, int order);

/// Plain values of the components, no derivatives.
std::vector<double> eval_values(const ImmersionSpec& spec, std::span<const double> point);

} // namespace kangle
