#pragma once

// Umbrella header for the asrforge toolkit.

#include "asrforge/audio.hpp"
#include "asrforge/bpe.hpp"
#include "asrforge/corpus.hpp"
#include "asrforge/ctc.hpp"
#include "asrforge/edit_distance.hpp"
#include "asrforge/error.hpp"
#include "asrforge/log.hpp"
#include "asrforge/manifest.hpp"
#include "asrforge/normalize.hpp"
#include "asrforge/resample.hpp"
#include "asrforge/score.hpp"
#include "asrforge/symbol_table.hpp"
#include "asrforge/unicode.hpp"
#include "asrforge/vad.hpp"
#include "asrforge/wav.hpp"
