#pragma once

#include "exhird/errors.hpp"
#include "exhird/eval/metrics.hpp"
#include "exhird/eval/report.hpp"
#include "exhird/exclusion.hpp"
#include "exhird/model/decode.hpp"
#include "exhird/nn/gradcheck.hpp"
#include "exhird/pipeline.hpp"
#include "exhird/text/corpus_io.hpp"
#include "exhird/train/checkpoint.hpp"
#include "exhird/train/trainer.hpp"
