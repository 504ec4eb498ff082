import uvicorn
import logging
from contextlib import asynccontextmanager
from src.config import (
    APP_VERSION, CONFIG_FILE, CORPUS_DIR, HOST, LOG_LEVEL, PORT, REPORTS_DIR,
    SOURCE_EXTENSION, get_settings
)
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from src.frontend.parser import get_parser
from src.routes import router


# Setup logging
logging.basicConfig(
    level=LOG_LEVEL,
    format="%(asctime)s %(levelname)s %(name)s - %(message)s"
)
logger = logging.getLogger("aukernel")


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Lifespan event handler for startup and shutdown"""
    # Startup
    logger.info("="*70)
    logger.info("AU SKETCH KERNEL - STARTUP")
    logger.info("="*70)

    REPORTS_DIR.mkdir(exist_ok=True)
    logger.info(f"✓ Reports directory created/verified")

    # Settings
    try:
        settings = get_settings()
        logger.info(f"✓ Settings loaded: {settings.model_dump()}")
    except Exception as e:
        logger.error(f"✗ Failed to load settings from {CONFIG_FILE}: {e}")
        raise

    # Grammar
    try:
        get_parser()
        logger.info("✓ .auk grammar compiled")
    except Exception as e:
        logger.error(f"✗ Failed to compile the grammar: {e}")
        raise

    logger.info("="*70)
    logger.info("✓ AU sketch kernel startup complete")
    logger.info("="*70)

    yield  # Server runs here

    # Shutdown
    logger.info("Shutting down AU sketch kernel...")


app = FastAPI(
    title="AU Sketch Kernel",
    version=APP_VERSION,
    description="Checks contexts, eq-extensions, context maps and set models written as .auk documents",
    lifespan=lifespan
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

# Include routes
app.include_router(router)

def startup_message():
    """Display startup information"""
    settings = get_settings()
    logger.info("="*70)
    logger.info("AU SKETCH KERNEL")
    logger.info("="*70)
    logger.info(f"CORPUS_DIR: {CORPUS_DIR}")
    logger.info(f"REPORTS_DIR: {REPORTS_DIR}")
    logger.info(f"SOURCE_EXTENSION: {SOURCE_EXTENSION}")
    logger.info(f"LIST_BOUND: {settings.list_bound}")
    logger.info(f"SEARCH_DEPTH: {settings.search_depth}")
    logger.info(f"CONFIG_FILE: {CONFIG_FILE or '✗ Not set (environment only)'}")
    logger.info("="*70)

if __name__ == "__main__":
    startup_message()
    uvicorn.run(app, host=HOST, port=PORT, log_level="info")
