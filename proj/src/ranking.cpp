#include "promptga/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>

namespace promptga {

RankList rank_from_scores(std::span<const double> scores, std::span<const CandidateId> ids,
                          std::int64_t description_id) {
  if (scores.size() != ids.size()) throw ValidationError("score and id counts differ");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto key = [&](std::size_t i) { return std::llround(scores[i] * 1e12); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = key(a);
    const auto kb = key(b);
    if (ka != kb) return ka < kb;
    return ids[a] < ids[b];
  });
  RankList out;
  out.description_id = description_id;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!out.ranks.emplace(ids[order[r]], static_cast<int>(r + 1)).second)
      throw ValidationError("duplicate candidate id in rank input");
  }
  return out;
}

double average_rank(std::span<const RankList> rank_lists, CandidateId candidate) {
  if (rank_lists.empty()) throw StateError("no rank lists to average");
  double sum = 0;
  for (const auto& list : rank_lists) {
    const auto it = list.ranks.find(candidate);
    if (it == list.ranks.end())
      throw StateError("candidate " + std::to_string(candidate) + " missing from rank list of description " +
                       std::to_string(list.description_id));
    sum += it->second;
  }
  return sum / static_cast<double>(rank_lists.size());
}

std::vector<LeaderboardEntry> leaderboard(std::span<const RankList> rank_lists,
                                          std::span<const CandidateId> candidate_ids) {
  std::vector<LeaderboardEntry> board;
  board.reserve(candidate_ids.size());
  for (auto id : candidate_ids) board.push_back({id, average_rank(rank_lists, id)});
  std::stable_sort(board.begin(), board.end(), [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    if (a.average_rank != b.average_rank) return a.average_rank > b.average_rank;
    return a.id < b.id;
  });
  return board;
}

void write_leaderboard_csv(std::ostream& out, std::span<const LeaderboardEntry> board,
                           const std::function<const KeywordMask&(CandidateId)>& mask_of) {
  out << "candidate_id,average_rank,popcount,mask_hex\n";
  for (const auto& e : board) {
    const auto& mask = mask_of(e.id);
    out << e.id << ',' << std::setprecision(10) << e.average_rank << ',' << mask.popcount() << ','
        << mask.to_hex() << '\n';
  }
}

}  // namespace promptga
