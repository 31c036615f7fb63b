#pragma once

// Program representations for the classifiers.
//
// Two encodings of a program's token stream:
//   - bag: relative frequencies over the vocabulary, counting only keyword,
//     operator, and punctuation tokens (indent/dedent count as punctuation;
//     identifiers and literals are skipped so surface renames cannot move the
//     vector, which is the point of a structure-frequency representation)
//   - sequence: the first L tokens one-hot per row, padded with the pad id
//
// The representation token stream is the lexer stream minus newline tokens;
// indent/dedent participate through `<indent>`/`<dedent>` placeholder
// lexemes.  Ids 0 and 1 are reserved for `<pad>` and `<unk>`; the unk bucket
// absorbs out-of-vocabulary tokens.  Vocabularies are built from the training
// split only and serialize as one lexeme per line in id order.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixcode/lang.hpp"

namespace mixcode::represent {

// --- Vocabulary ---

inline constexpr std::size_t kPadId = 0;
inline constexpr std::size_t kUnkId = 1;
inline constexpr const char* kPadLexeme = "<pad>";
inline constexpr const char* kUnkLexeme = "<unk>";
inline constexpr std::size_t kDefaultMaxVocab = 512;
inline constexpr std::size_t kDefaultSeqLen = 64;

struct Vocabulary {
    std::map<std::string, std::size_t> token_to_id;
    std::vector<std::string> id_to_token;  // dense, id = index

    std::size_t size() const { return id_to_token.size(); }

    std::size_t id_of(const std::string& lexeme) const {
        auto it = token_to_id.find(lexeme);
        return it == token_to_id.end() ? kUnkId : it->second;
    }
};

struct VocabularyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- Representation token stream ---

enum class TokenClass { Keyword, Operator, Punctuation, Identifier, Literal };

struct ReprToken {
    std::string lexeme;
    TokenClass cls;
};

// A token participates in bag counting iff it is structural.
inline bool counted_in_bag(TokenClass cls) {
    return cls == TokenClass::Keyword || cls == TokenClass::Operator ||
           cls == TokenClass::Punctuation;
}

inline std::vector<ReprToken> repr_tokens(const lang::Program& prog) {
    std::vector<ReprToken> out;
    for (const lang::Token& tok : lang::tokenize(lang::render(prog))) {
        switch (tok.kind) {
            case lang::TokenKind::Newline: break;  // not part of the representation
            case lang::TokenKind::Indent: out.push_back({"<indent>", TokenClass::Punctuation}); break;
            case lang::TokenKind::Dedent: out.push_back({"<dedent>", TokenClass::Punctuation}); break;
            case lang::TokenKind::Keyword: out.push_back({tok.lexeme, TokenClass::Keyword}); break;
            case lang::TokenKind::Operator: out.push_back({tok.lexeme, TokenClass::Operator}); break;
            case lang::TokenKind::Punct: out.push_back({tok.lexeme, TokenClass::Punctuation}); break;
            case lang::TokenKind::Identifier:
                out.push_back({tok.lexeme, TokenClass::Identifier});
                break;
            case lang::TokenKind::IntLiteral:
            case lang::TokenKind::StrLiteral:
                out.push_back({tok.lexeme, TokenClass::Literal});
                break;
        }
    }
    return out;
}

// Builds a vocabulary over the corpus token streams.  `max_size` bounds the
// total size including the two reserved ids; the most frequent lexemes are
// kept, ties broken lexicographically.
inline Vocabulary build_vocab(const std::vector<lang::Program>& corpus,
                              std::size_t max_size = kDefaultMaxVocab) {
    if (max_size < 2) throw VocabularyError("vocabulary max_size must be at least 2");
    std::map<std::string, std::size_t> freq;
    for (const lang::Program& prog : corpus) {
        for (const ReprToken& tok : repr_tokens(prog)) ++freq[tok.lexeme];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary vocab;
    vocab.id_to_token = {kPadLexeme, kUnkLexeme};
    for (const auto& [lexeme, count] : ranked) {
        if (vocab.id_to_token.size() >= max_size) break;
        vocab.id_to_token.push_back(lexeme);
    }
    for (std::size_t i = 0; i < vocab.id_to_token.size(); ++i) {
        vocab.token_to_id[vocab.id_to_token[i]] = i;
    }
    return vocab;
}

inline void save_vocab(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw VocabularyError("cannot write vocabulary file: " + path);
    for (const std::string& lexeme : vocab.id_to_token) out << lexeme << '\n';
}

inline Vocabulary load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw VocabularyError("cannot read vocabulary file: " + path);
    Vocabulary vocab;
    std::string line;
    while (std::getline(in, line)) vocab.id_to_token.push_back(line);
    if (vocab.size() < 2 || vocab.id_to_token[kPadId] != kPadLexeme ||
        vocab.id_to_token[kUnkId] != kUnkLexeme) {
        throw VocabularyError("malformed vocabulary file: " + path);
    }
    for (std::size_t i = 0; i < vocab.id_to_token.size(); ++i) {
        vocab.token_to_id[vocab.id_to_token[i]] = i;
    }
    return vocab;
}

// --- Feature containers ---

enum class FeatureKind { Bag, FlattenedSeq };

struct ShapeMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FeatureVector {
    FeatureKind kind = FeatureKind::Bag;
    std::vector<double> values;

    bool operator==(const FeatureVector&) const = default;
};

// L x V row-major matrix; each row is a distribution over the vocabulary
// (exactly one-hot straight out of the encoder, convex mixtures after mixup).
struct SeqMatrix {
    std::size_t length = 0;
    std::size_t vocab_size = 0;
    std::vector<double> values;  // length * vocab_size

    SeqMatrix() = default;
    SeqMatrix(std::size_t len, std::size_t vocab)
        : length(len), vocab_size(vocab), values(len * vocab, 0.0) {}

    double& at(std::size_t row, std::size_t col) { return values[row * vocab_size + col]; }
    double at(std::size_t row, std::size_t col) const { return values[row * vocab_size + col]; }

    FeatureVector flatten() const { return {FeatureKind::FlattenedSeq, values}; }

    bool operator==(const SeqMatrix&) const = default;
};

struct LabelVector {
    std::vector<double> values;

    bool operator==(const LabelVector&) const = default;
};

struct IndexOutOfRangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- Encoders ---

// Relative frequencies of structural tokens.  A program with no counted
// tokens (the empty program) encodes as the zero vector.
inline FeatureVector encode_bag(const lang::Program& prog, const Vocabulary& vocab) {
    FeatureVector out;
    out.kind = FeatureKind::Bag;
    out.values.assign(vocab.size(), 0.0);
    std::size_t total = 0;
    for (const ReprToken& tok : repr_tokens(prog)) {
        if (!counted_in_bag(tok.cls)) continue;
        out.values[vocab.id_of(tok.lexeme)] += 1.0;
        ++total;
    }
    if (total > 0) {
        for (double& v : out.values) v /= static_cast<double>(total);
    }
    return out;
}

// One-hot rows for the first `seq_len` tokens, pad rows afterwards.
inline SeqMatrix encode_seq(const lang::Program& prog, const Vocabulary& vocab,
                            std::size_t seq_len = kDefaultSeqLen) {
    SeqMatrix out;
    out.length = seq_len;
    out.vocab_size = vocab.size();
    out.values.assign(seq_len * vocab.size(), 0.0);
    const std::vector<ReprToken> tokens = repr_tokens(prog);
    for (std::size_t row = 0; row < seq_len; ++row) {
        const std::size_t id = row < tokens.size() ? vocab.id_of(tokens[row].lexeme) : kPadId;
        out.at(row, id) = 1.0;
    }
    return out;
}

inline LabelVector encode_label(std::size_t class_index, std::size_t num_classes) {
    if (class_index >= num_classes) {
        throw IndexOutOfRangeError("class index " + std::to_string(class_index) +
                                   " out of range for " + std::to_string(num_classes) +
                                   " classes");
    }
    LabelVector out;
    out.values.assign(num_classes, 0.0);
    out.values[class_index] = 1.0;
    return out;
}

// --- Encoder configuration shared by training and evaluation ---

enum class ReprKind { Bag, Seq };

struct Features {
    // Bag features live in `vec`; sequence features in `seq`.
    ReprKind kind = ReprKind::Bag;
    FeatureVector vec;
    SeqMatrix seq;

    bool operator==(const Features&) const = default;
};

struct EncoderConfig {
    ReprKind kind = ReprKind::Bag;
    const Vocabulary* vocab = nullptr;
    std::size_t seq_len = kDefaultSeqLen;

    Features encode(const lang::Program& prog) const {
        Features f;
        f.kind = kind;
        if (kind == ReprKind::Bag) {
            f.vec = encode_bag(prog, *vocab);
        } else {
            f.seq = encode_seq(prog, *vocab, seq_len);
        }
        return f;
    }
};

inline ReprKind repr_kind_from_name(const std::string& name) {
    if (name == "bag") return ReprKind::Bag;
    if (name == "seq") return ReprKind::Seq;
    throw std::invalid_argument("unknown representation: " + name);
}

}  // namespace mixcode::represent
