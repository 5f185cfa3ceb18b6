"""The service endpoints.

Input problems (unparseable corpus lines, impossible configs, bad
lexicon files) map to 422 so clients can distinguish them from runtime
failures (500, e.g. training divergence or I/O errors).
"""

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ConfigurationError
from ..corpus import CorpusFormatError
from ..model import DivergenceError
from .. import experiments
from .schemas import (
    GridRequest,
    GridResponse,
    HealthResponse,
    PreprocessRequest,
    PreprocessResponse,
    TrainRequest,
    TrainResponse,
    ValidateRequest,
    ValidateResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="mtal", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/v1/corpus/validate", response_model=ValidateResponse)
    def validate(request: ValidateRequest):
        result = experiments.validate_records(
            request.lines, request.columns, request.expectations
        )
        return ValidateResponse(**result)

    @app.post("/v1/preprocess", response_model=PreprocessResponse)
    def preprocess(request: PreprocessRequest):
        try:
            lines = experiments.preprocess_records(request.lines, request.emoji)
        except (ValueError, OSError) as exc:  # bad lexicon file or weights
            raise HTTPException(status_code=422, detail=str(exc))
        return PreprocessResponse(lines=lines)

    @app.post("/v1/train", response_model=TrainResponse)
    def train(request: TrainRequest):
        try:
            result = experiments.run_file_experiment(
                request.config,
                request.train_path,
                request.dev_path,
                request.test_path,
                request.out_dir,
            )
        except (ConfigurationError, CorpusFormatError, FileNotFoundError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except (DivergenceError, OSError) as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        return TrainResponse(**result)

    @app.post("/v1/grid", response_model=GridResponse)
    def grid(request: GridRequest):
        try:
            result = experiments.run_grid(
                request.grid,
                request.train_path,
                request.dev_path,
                request.test_path,
                request.out_dir,
                jobs=request.jobs,
            )
        except OSError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        return GridResponse(
            summary=result["summary"],
            summary_json_path=result["summary_json_path"],
            summary_tsv_path=result["summary_tsv_path"],
            summary_txt_path=result["summary_txt_path"],
            failed_cells=result["summary"]["failed_cells"],
        )

    return app


app = create_app()
