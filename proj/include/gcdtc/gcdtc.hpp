#ifndef GCDTC_GCDTC_HPP
#define GCDTC_GCDTC_HPP

// Umbrella header for the GCDTC compression pipeline.

#include "gcdtc/codec/config.hpp"
#include "gcdtc/codec/decode.hpp"
#include "gcdtc/codec/model.hpp"
#include "gcdtc/codec/schedule.hpp"
#include "gcdtc/codec/train.hpp"
#include "gcdtc/core/blocks.hpp"
#include "gcdtc/core/field.hpp"
#include "gcdtc/entropy/bitstream.hpp"
#include "gcdtc/entropy/huffman.hpp"
#include "gcdtc/entropy/quantize.hpp"
#include "gcdtc/guarantee/basis.hpp"
#include "gcdtc/guarantee/correct.hpp"
#include "gcdtc/io/raw.hpp"
#include "gcdtc/io/synthetic.hpp"
#include "gcdtc/nn/adam.hpp"
#include "gcdtc/nn/checkpoint.hpp"
#include "gcdtc/nn/graph.hpp"
#include "gcdtc/nn/init.hpp"
#include "gcdtc/nn/tensor.hpp"
#include "gcdtc/nn/time_embedding.hpp"
#include "gcdtc/pipeline/archive.hpp"
#include "gcdtc/pipeline/compress.hpp"
#include "gcdtc/pipeline/config.hpp"
#include "gcdtc/pipeline/metrics.hpp"
#include "gcdtc/tc/correction.hpp"

#endif
