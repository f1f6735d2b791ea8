#pragma once

#include <optional>
#include <string>
#include <vector>

namespace bondkit {

/// Ordinal credit-rating scale, best rating first. Notch distance between two
/// ratings is the difference of their positions.
class RatingScale {
public:
    RatingScale() = default;

    /// Throws InvalidConfig on duplicates or an empty list.
    explicit RatingScale(std::vector<std::string> ordered_best_first);

    /// 22-notch S&P-style scale AAA .. D.
    static const RatingScale& standard();

    /// Plain-text file, one rating per line, best first. '#' starts a comment.
    static RatingScale from_file(const std::string& path);

    bool contains(const std::string& rating) const { return find(rating).has_value(); }

    /// Position in the scale (0 = best). Throws UnknownRating.
    int rank(const std::string& rating) const;

    int notch_distance(const std::string& a, const std::string& b) const;

    std::size_t size() const { return ordered_.size(); }
    const std::vector<std::string>& ratings() const { return ordered_; }
    const std::string& at(std::size_t position) const { return ordered_.at(position); }

private:
    std::optional<int> find(const std::string& rating) const;

    std::vector<std::string> ordered_;
};

}  // namespace bondkit
