#include "wmlab/textgen.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "wmlab/rng.hpp"

namespace wmlab {

namespace {

constexpr std::uint32_t kLemmaCount = 30000;
constexpr double kZipfExponent = 1.3;

// Word classes: 0 = noun, 1 = verb, 2 = adjective.
constexpr int kNumClasses = 3;

struct GenreTable {
    // First syllable selects the word class; remaining syllables encode the
    // lemma rank.  All syllables are two letters, so surface forms are
    // unambiguous, and the two genres use disjoint syllable inventories.
    std::array<std::array<const char*, 5>, kNumClasses> firsts;
    std::array<const char*, 20> digits;
    std::vector<std::string> templates;
    std::vector<std::string> boilerplate;
};

const GenreTable& story_table() {
    static const GenreTable table{
        {{{"ba", "do", "fe", "gu", "la"},
          {"mo", "ne", "pi", "ru", "sa"},
          {"ta", "ve", "wi", "zo", "ka"}}},
        {"re", "lu", "mi", "to", "da", "ny", "po", "si", "vu", "me",
         "ri", "fo", "nu", "pa", "le", "du", "ko", "ga", "ce", "bi"},
        {
            "%T %A %N %V %T %N of %T %N %E",
            "%T %N %V %P %T %A %N %M and %T %N %V %E",
            "%T %N %V %P %T %N %C %T %A %N %V %E",
            "when %T %N %V %M %T %A %N %V %T %N %E",
            "%D %T %N %V %T %N %M %C it %V %T %A %N %E",
            "%T %A %N of %T %N %V %P %T %N %E",
            "every %N %V %T %A %N near %T %N %E",
            "no %N could %V %T %N without %T %A %N %E",
            "%T %N %V and %T %N %V %P %T %A %N %E",
            "some %N %V that %T %A %N %V %T %N %E",
            "it was %T %N that %V %T %A %N %P %T %N %E",
            "after %T %N %V %M %T %A %N %V %P %T %N %E",
            "%T %N of %T %A %N %V %D %P %T %N %E",
            "one %A %N %V another %N %C %T %N %V %E",
            "%D %M %T %N %V %T %A %N of %T %N %E",
            "%T %N %V because %T %A %N %V %T %N %E",
            "%T %A %N and %T %A %N %V %P %T %N %E",
            "they say %T %N %V %T %N %C %T %A %N %V %E",
            "%T %N %V %M yet %T %N of %T %N %V too %E",
            "perhaps %T %A %N %V %P %T %N %E",
        },
        {
            "it was a long and quiet evening in the old house .",
            "nobody said a word for a while after that .",
            "the morning came and the story began again .",
            "and so the day ended as it always did .",
        },
    };
    return table;
}

const GenreTable& technical_table() {
    static const GenreTable table{
        {{{"qu", "vo", "xy", "ze", "yt"},
          {"ja", "je", "jo", "ju", "jy"},
          {"hy", "he", "ho", "hu", "ha"}}},
        {"ex", "on", "ix", "ul", "ar", "um", "yn", "os", "ty", "cr",
         "pl", "gr", "ch", "ph", "tr", "st", "br", "dr", "sc", "fl"},
        {
            "%T %A %N %V %T %N of %T %N %E",
            "each %N %V %T %A %N %P %T %N %E",
            "%T %N %V %P %T %N %C %T %A %N %V %E",
            "if %T %N %V %M %T %N %V %T %A %N %E",
            "%T %N %V %T %N %M %C %T %A %N %V %E",
            "%T %A %N %V %P every %N of %T %N %E",
            "this %N %V %T %A %N %P %T %N %E",
            "%T %N and %T %N %V %T %A %N %E",
            "for each %N %M %T %A %N %V %T %N %E",
            "%T %A %N %V when %T %N %V %T %N %E",
            "%T %N of %T %N %V %P %T %A %N %E",
            "under %T %A %N %M %T %N %V %T %N %E",
            "hence %T %N %V %M and %T %N %V too %E",
        },
        {
            "the result follows directly from the previous step .",
            "we repeat the procedure until the values converge .",
            "the same argument applies in the general case .",
        },
    };
    return table;
}

const GenreTable& table_for(Genre genre) {
    return genre == Genre::story ? story_table() : technical_table();
}

const std::array<const char*, 6>& preposition_choices() {
    static const std::array<const char*, 6> words{"in", "on", "under", "near", "beyond", "within"};
    return words;
}

const std::array<const char*, 6>& conjunction_choices() {
    static const std::array<const char*, 6> words{"and", "but", "while", "because", "though", "so"};
    return words;
}

const std::array<const char*, 6>& adverb_choices() {
    static const std::array<const char*, 6> words{"slowly", "suddenly", "quietly", "finally", "almost", "truly"};
    return words;
}

// Weighted closed-class choices: every frequent token competes with
// alternatives, so no surface form is locked to a deterministic slot.
const std::array<const char*, 10>& determiner_choices() {
    static const std::array<const char*, 10> words{"the", "the", "the", "a",   "a",
                                                   "this", "that", "each", "its", "one"};
    return words;
}

const std::array<const char*, 6>& end_punct_choices() {
    static const std::array<const char*, 6> words{".", ".", ".", ".", "!", "?"};
    return words;
}

const std::array<const char*, 5>& mid_punct_choices() {
    static const std::array<const char*, 5> words{",", ",", ",", ";", ":"};
    return words;
}

// Cumulative weights of the lemma power law, built once per process.
const std::vector<double>& zipf_cdf() {
    static const std::vector<double> cdf = [] {
        std::vector<double> c(kLemmaCount);
        double acc = 0.0;
        for (std::uint32_t r = 0; r < kLemmaCount; ++r) {
            acc += std::pow(static_cast<double>(r + 1), -kZipfExponent);
            c[r] = acc;
        }
        for (auto& x : c) x /= acc;
        return c;
    }();
    return cdf;
}

std::uint32_t draw_zipf_rank(Rng& rng) {
    const auto& cdf = zipf_cdf();
    const double u = rng.next_double();
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::uint32_t>(it - cdf.begin());
}

void append_word(std::string& out, std::string_view word) {
    if (!out.empty()) out.push_back(' ');
    out.append(word);
}

}  // namespace

std::string content_word(Genre genre, int word_class, std::uint32_t rank) {
    if (word_class < 0 || word_class >= kNumClasses) {
        throw std::invalid_argument("content_word: bad word class");
    }
    const GenreTable& table = table_for(genre);
    std::string word = table.firsts[static_cast<std::size_t>(word_class)][rank % 5];
    std::uint32_t q = rank / 5;
    // 1..3 base-20 digit syllables; word length encodes the digit count.
    if (q < 20) {
        word += table.digits[q];
    } else if (q < 20 + 400) {
        q -= 20;
        word += table.digits[q / 20];
        word += table.digits[q % 20];
    } else {
        q -= 420;
        word += table.digits[(q / 400) % 20];
        word += table.digits[(q / 20) % 20];
        word += table.digits[q % 20];
    }
    return word;
}

Genre genre_from_name(const std::string& name) {
    if (name == "story") return Genre::story;
    if (name == "technical") return Genre::technical;
    throw std::invalid_argument("unknown genre: " + name);
}

const char* genre_name(Genre genre) {
    return genre == Genre::story ? "story" : "technical";
}

std::string synth_document(Genre genre, std::uint64_t seed, std::uint64_t doc_index,
                           std::size_t target_tokens) {
    const GenreTable& table = table_for(genre);
    Rng rng(seed_stream(seed, "textgen.doc", mix64(doc_index, static_cast<std::uint64_t>(genre))));

    std::string out;
    std::size_t tokens = 0;
    while (tokens < target_tokens) {
        // Boilerplate sentences recur verbatim: they give the corpus the
        // low-entropy stretches real prose has.
        const bool boiler = rng.next_double() < 0.10;
        const std::string& tmpl =
            boiler ? table.boilerplate[rng.next_below(static_cast<std::uint32_t>(table.boilerplate.size()))]
                   : table.templates[rng.next_below(static_cast<std::uint32_t>(table.templates.size()))];

        std::istringstream items(tmpl);
        std::string item;
        while (items >> item) {
            if (item == "%N") {
                append_word(out, content_word(genre, 0, draw_zipf_rank(rng)));
            } else if (item == "%V") {
                append_word(out, content_word(genre, 1, draw_zipf_rank(rng)));
            } else if (item == "%A") {
                append_word(out, content_word(genre, 2, draw_zipf_rank(rng)));
            } else if (item == "%P") {
                append_word(out, preposition_choices()[rng.next_below(6)]);
            } else if (item == "%C") {
                append_word(out, conjunction_choices()[rng.next_below(6)]);
            } else if (item == "%D") {
                append_word(out, adverb_choices()[rng.next_below(6)]);
            } else if (item == "%T") {
                append_word(out, determiner_choices()[rng.next_below(10)]);
            } else if (item == "%E") {
                append_word(out, end_punct_choices()[rng.next_below(6)]);
            } else if (item == "%M") {
                append_word(out, mid_punct_choices()[rng.next_below(5)]);
            } else {
                append_word(out, item);
            }
            ++tokens;
        }
    }
    return out;
}

std::vector<std::string> synth_corpus(Genre genre, std::uint64_t seed, std::size_t num_docs,
                                      std::size_t target_tokens) {
    std::vector<std::string> docs;
    docs.reserve(num_docs);
    for (std::size_t i = 0; i < num_docs; ++i) {
        docs.push_back(synth_document(genre, seed, i, target_tokens));
    }
    return docs;
}

}  // namespace wmlab
