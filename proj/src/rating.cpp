#include "bondkit/rating.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "bondkit/errors.hpp"

namespace bondkit {

RatingScale::RatingScale(std::vector<std::string> ordered_best_first)
    : ordered_(std::move(ordered_best_first)) {
    if (ordered_.empty()) throw Error(ErrorCode::InvalidConfig, "rating scale is empty");
    std::set<std::string> seen;
    for (const auto& r : ordered_) {
        if (r.empty()) throw Error(ErrorCode::InvalidConfig, "rating scale contains an empty entry");
        if (!seen.insert(r).second)
            throw Error(ErrorCode::InvalidConfig, "duplicate rating in scale: " + r);
    }
}

const RatingScale& RatingScale::standard() {
    static const RatingScale scale({
        "AAA", "AA+", "AA", "AA-", "A+", "A", "A-",
        "BBB+", "BBB", "BBB-", "BB+", "BB", "BB-",
        "B+", "B", "B-", "CCC+", "CCC", "CCC-", "CC", "C", "D",
    });
    return scale;
}

RatingScale RatingScale::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open rating scale file: " + path);
    std::vector<std::string> ratings;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t");
        std::string token = line.substr(first, last - first + 1);
        if (token.empty() || token[0] == '#') continue;
        ratings.push_back(std::move(token));
    }
    return RatingScale(std::move(ratings));
}

std::optional<int> RatingScale::find(const std::string& rating) const {
    for (std::size_t i = 0; i < ordered_.size(); ++i)
        if (ordered_[i] == rating) return static_cast<int>(i);
    return std::nullopt;
}

int RatingScale::rank(const std::string& rating) const {
    if (auto pos = find(rating)) return *pos;
    throw Error(ErrorCode::UnknownRating, "rating not in configured scale: " + rating);
}

int RatingScale::notch_distance(const std::string& a, const std::string& b) const {
    return std::abs(rank(a) - rank(b));
}

}  // namespace bondkit
