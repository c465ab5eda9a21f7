import argparse

import uvicorn

from .app import DEFAULT_MAX_REQUEST_BYTES, ServerConfig, create_app


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="modelserver")
    parser.add_argument("--port", type=int, default=8080)
    parser.add_argument("--mode", choices=["mock", "real"], default="mock")
    parser.add_argument("--model-dir", default=None)
    parser.add_argument("--max-request-bytes", type=int, default=DEFAULT_MAX_REQUEST_BYTES)
    args = parser.parse_args(argv)
    config = ServerConfig(port=args.port, mode=args.mode, model_dir=args.model_dir,
                          max_request_bytes=args.max_request_bytes)
    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
