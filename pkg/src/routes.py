import json
import logging
from fastapi import APIRouter, HTTPException
from pydantic import ValidationError
from src.schemas import (
    CheckRequest, EvalRequest, EqcheckRequest,
    ReportResponse, HealthResponse
)
from src.check_service import check_document, evaluate_model, load_workspace, verify_map_json
from src.config import APP_VERSION, get_settings
from src.kernel.errors import KernelError
from src.utilities import failed

logger = logging.getLogger("aukernel")
router = APIRouter()


def _bad_request(e: KernelError) -> HTTPException:
    return HTTPException(status_code=400, detail=e.to_record())


# --- Checking Endpoints ---

@router.post("/check", response_model=ReportResponse)
def check(req: CheckRequest):
    """
    Parse, elaborate and check a whole document.
    Parse errors are a 400; failed checks come back as records with ok=false.
    """
    try:
        logger.info(f"Check request: {req.document} ({len(req.source)} chars)")
        records = check_document(req.source, req.document)
        return ReportResponse(ok=not failed(records), records=records)
    except KernelError as e:
        logger.error(f"✗ /check rejected: {e}")
        raise _bad_request(e)
    except Exception as e:
        logger.exception("Error in /check")
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/eval", response_model=ReportResponse)
def eval_model(req: EvalRequest):
    """Carriers, verification and queries of one model."""
    try:
        ws = load_workspace(req.source)
        records = evaluate_model(ws, req.model, req.list_bound)
        if req.edge is not None:
            records = [r for r in records if r["kind"] != "eval" or r["name"] == f"{req.model}.{req.edge}"]
        return ReportResponse(ok=not failed(records), records=records)
    except KernelError as e:
        logger.error(f"✗ /eval rejected: {e}")
        raise _bad_request(e)
    except Exception as e:
        logger.exception("Error in /eval")
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/eqcheck", response_model=ReportResponse)
def eqcheck(req: EqcheckRequest):
    """Verify the given certificate, or search for one, between two context maps."""
    try:
        certificate = None if req.certificate is None else json.dumps(req.certificate)
        records, cert = verify_map_json(json.dumps(req.left), json.dumps(req.right), certificate)
        found = None if cert is None else json.loads(cert.model_dump_json())
        return ReportResponse(ok=not failed(records), records=records, certificate=found)
    except ValidationError as e:
        raise HTTPException(status_code=400, detail=f"not a context map: {e.error_count()} validation errors")
    except KernelError as e:
        logger.error(f"✗ /eqcheck rejected: {e}")
        raise _bad_request(e)
    except Exception as e:
        logger.exception("Error in /eqcheck")
        raise HTTPException(status_code=500, detail=str(e))


@router.get("/health", response_model=HealthResponse)
def health():
    """Health check endpoint"""
    return HealthResponse(status="ok", version=APP_VERSION, settings=get_settings().model_dump())
