// Port of Martin Porter's reference C implementation of the Porter stemmer.

#include <string>
#include <string_view>

#include "geosearch/text_index.hpp"

namespace geosearch {

namespace {

class PorterStemmer {
 public:
  explicit PorterStemmer(std::string_view word) : b_(word), k_(static_cast<int>(word.size()) - 1) {}

  std::string run() {
    if (k_ <= 1) return b_;
    step1ab();
    if (k_ > 0) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    b_.resize(static_cast<std::size_t>(k_ + 1));
    return b_;
  }

 private:
  char at(int i) const { return b_[static_cast<std::size_t>(i)]; }

  bool cons(int i) const {
    switch (at(i)) {
      case 'a': case 'e': case 'i': case 'o': case 'u': return false;
      case 'y': return i == 0 ? true : !cons(i - 1);
      default: return true;
    }
  }

  // Number of consonant-vowel sequences in b[0..j].
  int m() const {
    int n = 0;
    int i = 0;
    for (;;) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    for (;;) {
      for (;;) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      for (;;) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i) {
      if (!cons(i)) return true;
    }
    return false;
  }

  bool double_c(int j) const { return j >= 1 && at(j) == at(j - 1) && cons(j); }

  // consonant-vowel-consonant ending at i, last consonant not w, x or y.
  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    const char ch = at(i);
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(std::string_view s) {
    const int len = static_cast<int>(s.size());
    if (s.back() != at(k_)) return false;
    if (len > k_ + 1) return false;
    if (std::string_view(b_).substr(static_cast<std::size_t>(k_ - len + 1), s.size()) != s) {
      return false;
    }
    j_ = k_ - len;
    return true;
  }

  void set_to(std::string_view s) {
    b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
    k_ = j_ + static_cast<int>(s.size());
  }

  void r(std::string_view s) {
    if (m() > 0) set_to(s);
  }

  void step1ab() {
    if (at(k_) == 's') {
      if (ends("sses")) {
        k_ -= 2;
      } else if (ends("ies")) {
        set_to("i");
      } else if (at(k_ - 1) != 's') {
        --k_;
      }
    }
    if (ends("eed")) {
      if (m() > 0) --k_;
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k_ = j_;
      if (ends("at")) {
        set_to("ate");
      } else if (ends("bl")) {
        set_to("ble");
      } else if (ends("iz")) {
        set_to("ize");
      } else if (double_c(k_)) {
        --k_;
        const char ch = at(k_);
        if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
      } else if (j_ = k_; m() == 1 && cvc(k_)) {
        set_to("e");
      }
    }
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_[static_cast<std::size_t>(k_)] = 'i';
  }

  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };

  // Applies the first rule whose suffix matches; r() guards on m() > 0.
  template <std::size_t N>
  void first_of(const Rule (&rules)[N]) {
    for (const auto& rule : rules) {
      if (ends(rule.suffix)) {
        r(rule.replacement);
        return;
      }
    }
  }

  void step2() {
    if (k_ < 1) return;
    switch (at(k_ - 1)) {
      case 'a': {
        static constexpr Rule rules[] = {{"ational", "ate"}, {"tional", "tion"}};
        first_of(rules);
        break;
      }
      case 'c': {
        static constexpr Rule rules[] = {{"enci", "ence"}, {"anci", "ance"}};
        first_of(rules);
        break;
      }
      case 'e': {
        static constexpr Rule rules[] = {{"izer", "ize"}};
        first_of(rules);
        break;
      }
      case 'l': {
        static constexpr Rule rules[] = {
            {"bli", "ble"}, {"alli", "al"}, {"entli", "ent"}, {"eli", "e"}, {"ousli", "ous"}};
        first_of(rules);
        break;
      }
      case 'o': {
        static constexpr Rule rules[] = {{"ization", "ize"}, {"ation", "ate"}, {"ator", "ate"}};
        first_of(rules);
        break;
      }
      case 's': {
        static constexpr Rule rules[] = {
            {"alism", "al"}, {"iveness", "ive"}, {"fulness", "ful"}, {"ousness", "ous"}};
        first_of(rules);
        break;
      }
      case 't': {
        static constexpr Rule rules[] = {{"aliti", "al"}, {"iviti", "ive"}, {"biliti", "ble"}};
        first_of(rules);
        break;
      }
      case 'g': {
        static constexpr Rule rules[] = {{"logi", "log"}};
        first_of(rules);
        break;
      }
      default: break;
    }
  }

  void step3() {
    switch (at(k_)) {
      case 'e': {
        static constexpr Rule rules[] = {{"icate", "ic"}, {"ative", ""}, {"alize", "al"}};
        first_of(rules);
        break;
      }
      case 'i': {
        static constexpr Rule rules[] = {{"iciti", "ic"}};
        first_of(rules);
        break;
      }
      case 'l': {
        static constexpr Rule rules[] = {{"ical", "ic"}, {"ful", ""}};
        first_of(rules);
        break;
      }
      case 's': {
        static constexpr Rule rules[] = {{"ness", ""}};
        first_of(rules);
        break;
      }
      default: break;
    }
  }

  bool any_end(std::initializer_list<std::string_view> suffixes) {
    for (auto s : suffixes) {
      if (ends(s)) return true;
    }
    return false;
  }

  void step4() {
    if (k_ < 1) return;
    bool matched = false;
    switch (at(k_ - 1)) {
      case 'a': matched = any_end({"al"}); break;
      case 'c': matched = any_end({"ance", "ence"}); break;
      case 'e': matched = any_end({"er"}); break;
      case 'i': matched = any_end({"ic"}); break;
      case 'l': matched = any_end({"able", "ible"}); break;
      case 'n': matched = any_end({"ant", "ement", "ment", "ent"}); break;
      case 'o':
        matched = (ends("ion") && j_ >= 0 && (at(j_) == 's' || at(j_) == 't')) || ends("ou");
        break;
      case 's': matched = any_end({"ism"}); break;
      case 't': matched = any_end({"ate", "iti"}); break;
      case 'u': matched = any_end({"ous"}); break;
      case 'v': matched = any_end({"ive"}); break;
      case 'z': matched = any_end({"ize"}); break;
      default: break;
    }
    if (matched && m() > 1) k_ = j_;
  }

  void step5() {
    j_ = k_;
    if (at(k_) == 'e') {
      const int a = m();
      if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
    }
    if (at(k_) == 'l' && double_c(k_) && m() > 1) --k_;
  }

  std::string b_;
  int k_;
  int j_ = 0;
};

}  // namespace

std::string porter_stem(std::string_view word) { return PorterStemmer(word).run(); }

}  // namespace geosearch
