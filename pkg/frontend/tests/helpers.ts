// A tiny fake fetch backed by the captured service fixtures. Records
// every request so tests can assert exact payloads.

import { vi } from "vitest";

import model from "./fixtures/model.json";
import projection from "./fixtures/projection.json";
import replays from "./fixtures/replays.json";
import classifications from "./fixtures/classifications_uncertain.json";
import retrain from "./fixtures/retrain.json";

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

export type Responder = (req: RecordedRequest) => { status: number; body: unknown };

interface Route {
  method: string;
  pattern: RegExp;
  respond: Responder;
}

export const fixtures = { model, projection, replays, classifications, retrain };

export class FakeService {
  requests: RecordedRequest[] = [];
  /** Mirrors the real service: retrain bumps the version GET /v1/model reports. */
  modelVersion = model.version;
  private routes: Route[] = [];

  constructor() {
    this.on("GET", /^\/v1\/model$/, () => ({
      status: 200,
      body: { ...model, version: this.modelVersion },
    }));
    this.on("GET", /^\/v1\/projection$/, () => ({
      status: 200,
      body: { ...projection, version: this.modelVersion },
    }));
    this.on("GET", /^\/v1\/replays(\?.*)?$/, () => ({ status: 200, body: replays }));
    this.on("GET", /^\/v1\/replays\/[^/]+\/classifications/, () => ({
      status: 200,
      body: classifications,
    }));
    this.on("POST", /^\/v1\/corrections$/, (req) => ({
      status: 200,
      body: { accepted: (req.body as unknown[]).length, duplicates: 0, new_classes: [] },
    }));
    this.on("POST", /^\/v1\/retrain$/, () => {
      const old = this.modelVersion;
      this.modelVersion += 1;
      return {
        status: 200,
        body: {
          old_version: old,
          new_version: this.modelVersion,
          training_size: retrain.training_size,
        },
      };
    });
  }

  /** Prepend a route so it takes precedence over the fixture defaults. */
  on(method: string, pattern: RegExp, respond: Responder): void {
    this.routes.unshift({ method, pattern, respond });
  }

  install(): void {
    vi.stubGlobal(
      "fetch",
      vi.fn(async (url: string, init?: RequestInit) => {
        const method = init?.method ?? "GET";
        const path = url.toString();
        const req: RecordedRequest = {
          method,
          path,
          body: init?.body ? JSON.parse(init.body as string) : null,
        };
        this.requests.push(req);
        const route = this.routes.find((r) => r.method === method && r.pattern.test(path));
        if (!route) {
          return new Response(JSON.stringify({ detail: `no route ${method} ${path}` }), {
            status: 404,
            headers: { "Content-Type": "application/json" },
          });
        }
        const { status, body } = route.respond(req);
        return new Response(JSON.stringify(body), {
          status,
          headers: { "Content-Type": "application/json" },
        });
      }),
    );
  }

  posts(path: string): RecordedRequest[] {
    return this.requests.filter((r) => r.method === "POST" && r.path === path);
  }
}
