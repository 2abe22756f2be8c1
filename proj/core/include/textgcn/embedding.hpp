#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "textgcn/matrix.hpp"

namespace textgcn {

// Keyed embedding rows (tokens, or "#<id>" for sentence nodes).
struct EmbeddingTable {
  Matrix vectors;  // rows x dim
  std::vector<std::string> keys;
  std::unordered_map<std::string, std::size_t> key_map;

  std::size_t dim() const { return vectors.cols; }
  std::size_t size() const { return vectors.rows; }

  std::optional<std::size_t> row_of(std::string_view key) const {
    auto it = key_map.find(std::string(key));
    if (it == key_map.end()) return std::nullopt;
    return it->second;
  }

  static EmbeddingTable from_rows(Matrix vectors,
                                  std::vector<std::string> keys);
};

// word2vec text format: "count dim" header, then "key v1 ... vK" per row.
// Values are printed with 17 significant digits so reloads are exact.
void save_word2vec_text(const EmbeddingTable& table,
                        const std::filesystem::path& path);
EmbeddingTable load_word2vec_text(const std::filesystem::path& path);

std::string sentence_key(std::size_t sentence_id);

}  // namespace textgcn
