import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, StudioClient } from "../src/api";

function fakeFetch(status: number, body: unknown) {
  return vi.fn(async () => new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  }));
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("StudioClient", () => {
  it("posts demos with the expected version", async () => {
    const fetchMock = fakeFetch(200, { version: 3, demo_id: "stroke-1" });
    vi.stubGlobal("fetch", fetchMock);
    const client = new StudioClient("http://svc");
    const res = await client.addDemo(
      "sid",
      { id: "stroke-1", label: "success", points: [[0, 0], [1, 1]] },
      2,
    );
    expect(res.version).toBe(3);
    const [url, init] = fetchMock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("http://svc/sessions/sid/demos");
    expect(JSON.parse(init.body as string)).toMatchObject({
      id: "stroke-1",
      label: "success",
      expected_version: 2,
    });
  });

  it("surfaces version conflicts as ApiError 409", async () => {
    vi.stubGlobal("fetch",
      fakeFetch(409, { detail: "version conflict: expected 1, actual 2" }));
    const client = new StudioClient("http://svc");
    await expect(client.reproduce("sid")).rejects.toMatchObject({
      status: 409,
      detail: expect.stringContaining("version conflict"),
    });
  });

  it("surfaces validation errors with the service detail", async () => {
    vi.stubGlobal("fetch", fakeFetch(422, { detail: "row 1 has 1 values" }));
    const client = new StudioClient("http://svc");
    const err = await client
      .addDemo("sid", { id: "x", label: "failure", points: [[0]] })
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).detail).toBe("row 1 has 1 values");
  });

  it("strips a trailing slash from the base URL", () => {
    expect(new StudioClient("http://svc:99/").baseUrl).toBe("http://svc:99");
  });
});
