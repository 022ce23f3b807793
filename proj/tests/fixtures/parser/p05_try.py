async def fetch(session, url, *, timeout: float = 10.0) -> bytes:
    try:
        async with session.get(url, timeout=timeout) as resp:
            data = await resp.read()
    except (IOError, ValueError) as exc:
        log.warning("failed %s: %r", url, exc)
        raise
    except Exception:
        data = b''
    finally:
        session.close()
    return data
