"""signalcast: microblog discourse -> topic/sentiment time series ->
Granger-causal feature selection -> ARIMA/ARIMAX/VAR case forecasting."""

from .arima import (
    AcfResult,
    ArimaFit,
    ArimaSpec,
    ForecastResult,
    GridSearchResult,
    fit_arima,
    forecast,
    grid_search,
    information_criteria,
    psi_weights,
    residual_acf,
)
from .errors import (
    EstimationError,
    NonStationaryError,
    NumericError,
    SignalcastError,
    SingularMatrixError,
    ValidationError,
    ZeroVarianceError,
)
from .evaluation import BacktestResult, MetricsReport, backtest, metrics
from .ingest import (
    CleanDoc,
    CorpusSchema,
    StopwordList,
    TweetRecord,
    clean_and_tokenize,
    clean_corpus,
    detect_and_merge_bigrams,
    identity_normalizer,
    parse_corpus,
    select_tweets,
    split_region,
    suffix_normalizer,
)
from .sentiment import (
    LexiconProvider,
    PassthroughProvider,
    SentimentLabel,
    SidecarProvider,
    classify,
    classify_corpus,
)
from .series import (
    CaseSeries,
    LaggedDataset,
    SeriesTensor,
    TrendBlock,
    build_tensor,
    difference,
    lag_features,
    rescale_trend_blocks,
    undifference,
    volumetric_series,
)
from .stattests import (
    AdfResult,
    FeatureRank,
    GrangerResult,
    adf_test,
    ensure_stationary,
    granger_test,
    select_features,
)
from .topics import (
    BowCorpus,
    CoherenceScore,
    LdaModel,
    Vocabulary,
    assign_topic,
    build_vocabulary,
    coherence_cv,
    fit_lda,
    select_k,
)
from .var import VarFit, fit_var, forecast_var, select_var_order

__version__ = "0.1.0"
