#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spinsim {

struct Utterance {
  std::string utterance_id;
  std::vector<double> samples;
  double sample_rate = 0.0;
  std::string transcript;

  void validate() const;
  int word_count() const;
};

// Read-only sentence audio store.
class UtteranceSource {
public:
  virtual ~UtteranceSource() = default;
  virtual const Utterance& get(const std::string& utterance_id) const = 0;
  virtual std::vector<std::string> ids() const = 0;  // stable order
  virtual std::size_t size() const = 0;
};

// Built-in corpus: a fixed list of short sentences rendered by a small
// formant synthesizer. Fully deterministic; every utterance carries its
// word-level transcript. Stands in for a recorded sentence corpus.
class BuiltinCorpus final : public UtteranceSource {
public:
  explicit BuiltinCorpus(double sample_rate);

  const Utterance& get(const std::string& utterance_id) const override;
  std::vector<std::string> ids() const override;
  std::size_t size() const override { return utterances_.size(); }

private:
  std::vector<Utterance> utterances_;
};

enum class InterfererType { television, appliance, music, noise };

const char* interferer_type_name(InterfererType t);
InterfererType parse_interferer_type(const std::string& name);

// Read-only interferer signal store.
class InterfererSource {
public:
  virtual ~InterfererSource() = default;
  // Deterministic signal of exactly `length` samples for (type, seed).
  virtual std::vector<double> make(InterfererType type, std::uint64_t seed,
                                   std::size_t length) const = 0;
};

// Built-in non-speech interferers: shaped noise, chordal music, appliance
// hum, and a television-like music/noise mixture.
class BuiltinInterferers final : public InterfererSource {
public:
  explicit BuiltinInterferers(double sample_rate);

  std::vector<double> make(InterfererType type, std::uint64_t seed,
                           std::size_t length) const override;

private:
  double sample_rate_;
};

}  // namespace spinsim
