#include "hcn/features/embeddings.hpp"

#include <cstdlib>
#include <fstream>
#include <vector>

#include <fmt/format.h>

#include "hcn/features/tokenizer.hpp"
#include "hcn/util/error.hpp"
#include "hcn/util/log.hpp"

namespace hcn::features {
namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool is_unsigned(std::string_view s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string_view::npos;
}

double parse_double(std::string_view s, std::string_view source, std::size_t line_no) {
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size())
    throw DataError(fmt::format("{}:{}: bad number '{}'", source, line_no, s));
  return v;
}

}  // namespace

const Eigen::VectorXd* EmbeddingTable::find(std::string_view word) const {
  auto it = vectors_.find(std::string(word));
  return it == vectors_.end() ? nullptr : &it->second;
}

bool EmbeddingTable::insert(std::string word, Eigen::VectorXd vec) {
  if (static_cast<std::size_t>(vec.size()) != dimension_)
    throw DimensionError(fmt::format("embedding for '{}' has dimension {}, expected {}", word,
                                     vec.size(), dimension_));
  auto [it, fresh] = vectors_.insert_or_assign(std::move(word), std::move(vec));
  return fresh;
}

EmbeddingTable read_embeddings(std::istream& in, std::string_view source) {
  EmbeddingTable table;
  bool have_dim = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2 && is_unsigned(fields[0]) && is_unsigned(fields[1]))
      continue;  // word2vec header
    const std::size_t dim = fields.size() - 1;
    if (dim == 0)
      throw DataError(fmt::format("{}:{}: word '{}' has no values", source, line_no, fields[0]));
    if (!have_dim) {
      table = EmbeddingTable(dim);
      have_dim = true;
    } else if (dim != table.dimension()) {
      throw DataError(fmt::format("{}:{}: expected {} values, found {}", source, line_no,
                                  table.dimension(), dim));
    }
    Eigen::VectorXd vec(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k)
      vec(static_cast<Eigen::Index>(k)) = parse_double(fields[k + 1], source, line_no);
    std::string word(fields[0]);
    if (!table.insert(word, std::move(vec)))
      log::logger()->warn("{}:{}: duplicate embedding for '{}', keeping the later entry", source,
                          line_no, word);
  }
  if (!have_dim) throw DataError(fmt::format("{}: no embeddings found", source));
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_embeddings(in, path.string());
}

Eigen::VectorXd utterance_embedding(std::string_view utterance, const EmbeddingTable& table) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.dimension()));
  std::size_t hits = 0;
  for (const auto& tok : tokenize(utterance)) {
    if (const auto* v = table.find(tok)) {
      sum += *v;
      ++hits;
    }
  }
  if (hits > 0) sum /= static_cast<double>(hits);
  return sum;
}

}  // namespace hcn::features
