#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "okp/common.hpp"
#include "okp/model.hpp"

namespace okp {

namespace detail {

struct Token {
  std::string text;
  int line;
};

// '#' starts a comment; ':' always separates, attached or not.
inline std::vector<Token> tokenize_pomdp(std::istream& in) {
  std::vector<Token> tokens;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string cur;
    auto flush = [&] {
      if (!cur.empty()) {
        tokens.push_back({cur, line_no});
        cur.clear();
      }
    };
    for (char ch : line) {
      if (std::isspace(static_cast<unsigned char>(ch))) {
        flush();
      } else if (ch == ':') {
        flush();
        tokens.push_back({":", line_no});
      } else {
        cur += ch;
      }
    }
    flush();
  }
  return tokens;
}

class PomdpParser {
 public:
  explicit PomdpParser(std::istream& in) : tokens_(tokenize_pomdp(in)) {}

  PomdpModel parse() {
    while (!at_end()) section();
    finish_declarations();

    if (!seen_discount_) throw ParseError("missing mandatory 'discount:' line");
    if (!seen_values_) throw ParseError("missing mandatory 'values:' line");

    // Entries were buffered until all names were known; apply them now.
    const std::size_t S = states_.size(), A = actions_.size(),
                      O = observations_.size();
    transition_.assign(A * S * S, 0.0);
    observation_.assign(A * S * O, 0.0);
    reward4_.assign(A * S * S * O, 0.0);
    for (const auto& apply : deferred_) apply();

    // Validate stochasticity first; folding rewards relies on it.
    PomdpModel model(states_, actions_, observations_, transition_,
                     fold_rewards(), observation_, discount_, start_belief());
    return model;
  }

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token& peek(std::size_t ahead = 0) const {
    static const Token eof{"", 0};
    return pos_ + ahead < tokens_.size() ? tokens_[pos_ + ahead] : eof;
  }
  Token next() {
    if (at_end()) throw ParseError("unexpected end of input");
    return tokens_[pos_++];
  }
  void expect_colon(const char* after) {
    const Token t = next();
    if (t.text != ":")
      throw ParseError(std::string("expected ':' after ") + after + ", got '" +
                           t.text + "'",
                       t.line);
  }

  bool is_section_keyword(const std::string& s) const {
    return s == "discount" || s == "values" || s == "states" ||
           s == "actions" || s == "observations" || s == "start" ||
           s == "T" || s == "O" || s == "R";
  }
  bool at_section_start() const {
    return is_section_keyword(peek().text) && peek(1).text == ":";
  }

  static std::optional<double> as_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return v;
  }
  double number(const char* what) {
    const Token t = next();
    auto v = as_number(t.text);
    if (!v)
      throw ParseError(std::string("expected a number for ") + what +
                           ", got '" + t.text + "'",
                       t.line);
    return *v;
  }

  void section() {
    const Token head = next();
    const int line = head.line;
    if (!is_section_keyword(head.text))
      throw ParseError("unexpected token '" + head.text + "'", line);
    expect_colon(head.text.c_str());

    if (head.text == "discount") {
      discount_ = number("discount");
      seen_discount_ = true;
    } else if (head.text == "values") {
      const Token t = next();
      if (t.text != "reward")
        throw ParseError("only 'values: reward' is supported, got '" + t.text +
                             "'",
                         t.line);
      seen_values_ = true;
    } else if (head.text == "states") {
      states_ = name_list("state", line);
    } else if (head.text == "actions") {
      actions_ = name_list("action", line);
    } else if (head.text == "observations") {
      observations_ = name_list("observation", line);
    } else if (head.text == "start") {
      start_.clear();
      while (!at_end() && !at_section_start())
        start_.push_back(number("start probability"));
      if (start_.empty())
        throw ParseError("'start:' needs a probability vector", line);
      start_line_ = line;
    } else if (head.text == "T") {
      transition_entry(line);
    } else if (head.text == "O") {
      observation_entry(line);
    } else {
      reward_entry(line);
    }
  }

  std::vector<std::string> name_list(const char* kind, int line) {
    std::vector<std::string> names;
    while (!at_end() && !at_section_start() && peek().text != ":")
      names.push_back(next().text);
    if (names.empty())
      throw ParseError(std::string("empty ") + kind + " list", line);
    // A single integer declares a count; synthesized names are s0, s1, ...
    if (names.size() == 1) {
      if (auto n = as_number(names.front());
          n && *n >= 1 && *n == static_cast<int>(*n)) {
        std::vector<std::string> numbered;
        for (int i = 0; i < static_cast<int>(*n); ++i)
          numbered.push_back(std::string(1, kind[0]) + std::to_string(i));
        return numbered;
      }
    }
    return names;
  }

  // Name resolution runs deferred, after every declaration has been seen.
  int resolve(const std::vector<std::string>& names, const std::string& name,
              const char* kind, int line) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    throw ParseError(std::string("unknown ") + kind + " '" + name + "'", line);
  }

  std::vector<int> resolve_or_all(const std::vector<std::string>& names,
                                  const std::string& name, const char* kind,
                                  int line) const {
    if (name == "*") {
      std::vector<int> all(names.size());
      for (std::size_t i = 0; i < names.size(); ++i)
        all[i] = static_cast<int>(i);
      return all;
    }
    return {resolve(names, name, kind, line)};
  }

  void transition_entry(int line) {
    const std::string action = next().text;
    if (peek().text == ":") {
      // T: <a> : <s> : <s'> <p>
      expect_colon("action");
      const std::string from = next().text;
      expect_colon("state");
      const std::string to = next().text;
      const double p = number("transition probability");
      deferred_.push_back([=, this] {
        const int a = resolve(actions_, action, "action", line);
        const int s = resolve(states_, from, "state", line);
        const int s2 = resolve(states_, to, "state", line);
        transition_[(static_cast<std::size_t>(a) * states_.size() + s) *
                        states_.size() +
                    s2] = p;
      });
      return;
    }
    // T: <a> followed by 'identity' | 'uniform' | a row-major matrix.
    if (peek().text == "identity" || peek().text == "uniform") {
      const std::string kind = next().text;
      deferred_.push_back([=, this] {
        const int a = resolve(actions_, action, "action", line);
        const std::size_t S = states_.size();
        for (std::size_t s = 0; s < S; ++s)
          for (std::size_t s2 = 0; s2 < S; ++s2)
            transition_[(a * S + s) * S + s2] =
                kind == "identity" ? (s == s2 ? 1.0 : 0.0) : 1.0 / S;
      });
      return;
    }
    std::vector<double> matrix;
    while (!at_end() && !at_section_start())
      matrix.push_back(number("transition matrix entry"));
    deferred_.push_back([=, this] {
      const int a = resolve(actions_, action, "action", line);
      const std::size_t S = states_.size();
      if (matrix.size() != S * S)
        throw ParseError("transition matrix for action '" + action + "' has " +
                             std::to_string(matrix.size()) + " entries, " +
                             "expected " + std::to_string(S * S),
                         line);
      for (std::size_t i = 0; i < S * S; ++i)
        transition_[a * S * S + i] = matrix[i];
    });
  }

  void observation_entry(int line) {
    // O: <a|*> : <s'> : <o> <p>
    const std::string action = next().text;
    expect_colon("action");
    const std::string state = next().text;
    expect_colon("state");
    const std::string obs = next().text;
    const double p = number("observation probability");
    deferred_.push_back([=, this] {
      const int s2 = resolve(states_, state, "state", line);
      const int o = resolve(observations_, obs, "observation", line);
      for (int a : resolve_or_all(actions_, action, "action", line))
        observation_[(static_cast<std::size_t>(a) * states_.size() + s2) *
                         observations_.size() +
                     o] = p;
    });
  }

  void reward_entry(int line) {
    // R: <a|*> : <s|*> : <s'|*> : <o|*> <v>
    const std::string action = next().text;
    expect_colon("action");
    const std::string from = next().text;
    expect_colon("state");
    const std::string to = next().text;
    expect_colon("state");
    const std::string obs = next().text;
    const double v = number("reward value");
    deferred_.push_back([=, this] {
      const std::size_t S = states_.size(), O = observations_.size();
      for (int a : resolve_or_all(actions_, action, "action", line))
        for (int s : resolve_or_all(states_, from, "state", line))
          for (int s2 : resolve_or_all(states_, to, "state", line))
            for (int o : resolve_or_all(observations_, obs, "observation",
                                        line))
              reward4_[((static_cast<std::size_t>(a) * S + s) * S + s2) * O +
                       o] = v;
    });
  }

  void finish_declarations() const {
    if (states_.empty()) throw ParseError("missing mandatory 'states:' line");
    if (actions_.empty())
      throw ParseError("missing mandatory 'actions:' line");
    if (observations_.empty())
      throw ParseError("missing mandatory 'observations:' line");
  }

  /// R(a, s, s', o) folded to R(s, a) by expectation over T and O.
  std::vector<double> fold_rewards() const {
    const std::size_t S = states_.size(), A = actions_.size(),
                      O = observations_.size();
    std::vector<double> reward(S * A, 0.0);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t a = 0; a < A; ++a) {
        double value = 0.0;
        for (std::size_t s2 = 0; s2 < S; ++s2) {
          const double t = transition_[(a * S + s) * S + s2];
          if (t == 0.0) continue;
          double inner = 0.0;
          for (std::size_t o = 0; o < O; ++o)
            inner += observation_[(a * S + s2) * O + o] *
                     reward4_[((a * S + s) * S + s2) * O + o];
          value += t * inner;
        }
        reward[s * A + a] = value;
      }
    return reward;
  }

  std::optional<Belief> start_belief() const {
    if (start_.empty()) return std::nullopt;
    if (start_.size() != states_.size())
      throw ParseError("start belief has " + std::to_string(start_.size()) +
                           " entries, expected " +
                           std::to_string(states_.size()),
                       start_line_);
    return Belief(start_);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  std::vector<std::string> states_, actions_, observations_;
  std::vector<double> start_;
  int start_line_ = 0;
  double discount_ = 1.0;
  bool seen_discount_ = false, seen_values_ = false;
  std::vector<double> transition_, observation_, reward4_;
  std::vector<std::function<void()>> deferred_;
};

}  // namespace detail

/// Parses the `.pomdp` text format: discount/values/states/actions/
/// observations headers (counts or name lists), optional start vector, and
/// T/O/R entries with identity/uniform keywords and '*' wildcards. Rewards
/// of the form R(a, s, s', o) are folded to R(s, a) by expectation.
inline PomdpModel parse_model(std::istream& in) {
  detail::PomdpParser parser(in);
  return parser.parse();
}

inline PomdpModel parse_model(const std::string& text) {
  std::istringstream in(text);
  return parse_model(in);
}

inline PomdpModel parse_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  return parse_model(in);
}

}  // namespace okp
